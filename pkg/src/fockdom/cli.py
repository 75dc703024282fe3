"""Command-line entry point: one experiment per invocation.

Usage::

    fockdom [run] <subcommand> [--config FILE] [--key value ...]

Every config key is also a flag (``s_ladder`` -> ``--s-ladder``). Values
starting with ``-`` need the ``--key=value`` form. Reports go to
``<out>/report.json``, ``<out>/tables/*.csv`` and ``<out>/plotdata/*.csv``
together with the resolved ``config.ini``.

Exit status: 0 on success, 2 when a checked inequality fails empirically,
1 on any other error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from .config import FIELDS, RunConfig, load_config
from .errors import ConfigParseError, FockdomError, InvariantViolation
from .reporting import default_out_root, write_report

SUBCOMMANDS = ("rho", "growth", "covering", "summability", "harmonic", "density", "remez", "sample", "gamma",
               "gooddisks", "toeplitz")


class Outcome:
    """What a subcommand produced: report dict, CSV tables, plot data and checked inequalities."""

    def __init__(self):
        self.report = {}
        self.tables = {}
        self.plotdata = {}
        self.checks = {}
        self.lines = []

    def check(self, name, ok):
        self.checks[name] = bool(ok)

    def say(self, line):
        self.lines.append(line)


def _weight(cfg):
    from .weights import weight_from_name

    return weight_from_name(cfg.weight)


def _region(cfg):
    from .regions import parse_region

    return parse_region(cfg.region)


def _covering(cfg, w=None):
    from .covering import build_covering

    return build_covering(w or _weight(cfg), cfg.domain, cfg.delta, cfg.probe_n)


def _truncation(cfg, w=None):
    from .sampling import build_truncation

    return build_truncation(w or _weight(cfg), cfg.nmax, tol=cfg.tol)


# --------------------------------------------------------------------------
# subcommands


def cmd_rho(cfg, out):
    from .weights import rho

    w = _weight(cfg)
    rows = []
    for z in cfg.z:
        val = rho(w, z, cfg.tol)
        rows.append((z.real, z.imag, val))
        out.say(f"{val:.12g}")
    out.report.update(weight=w.name, rho=[{"re": x, "im": y, "rho": r} for x, y, r in rows])
    out.tables["rho"] = (["re", "im", "rho"], rows)


def cmd_growth(cfg, out):
    from .weights import adapted_mass, growth_exponent

    w = _weight(cfg)
    rep = growth_exponent(w, cfg.z, cfg.radii, cfg.tol)
    out.report.update(weight=w.name, growth=rep.as_record())
    rows = [(z.real, z.imag, r, adapted_mass(w, z, r, cfg.tol)) for z in cfg.z for r in cfg.radii]
    out.tables["growth"] = (["re", "im", "r", "mass"], rows)
    z0 = cfg.z[0]
    out.plotdata["mass_vs_r"] = ([r for r in cfg.radii], [m for (x, y, r, m) in rows if complex(x, y) == z0])
    out.say(f"kappa = {rep.kappa_fit:g}  C_mu ~ {rep.c_mu_estimate:.6g}")


def cmd_covering(cfg, out):
    from .covering import overlap_ladder, uncovered_points

    cov = _covering(cfg)
    miss = uncovered_points(cov, cov.r0_effective, cfg.probe_n)
    lad = overlap_ladder(cov, cfg.s_ladder, cfg.epsilon, probe_n=cfg.probe_n)
    out.report.update(
        weight=cov.weight.name, n_centers=len(cov), r0_effective=cov.r0_effective, delta=cov.delta,
        min_separation_ratio=cov.min_separation_ratio(), kappa=cov.kappa, uncovered=miss,
        overlap={"c_ov_fit": lad.c_ov_fit, "slope": lad.slope, "bound_exponent": lad.bound_exponent,
                 "n_measured": [r.n_measured for r in lad.reports], "s": [r.s for r in lad.reports]})
    out.tables["centers"] = (["k", "re", "im", "rho"], cov.rows())
    out.tables["overlap"] = (["s", "n_measured", "bound"],
                             [(r.s, r.n_measured, lad.c_ov_fit * (1 + r.s) ** lad.bound_exponent)
                              for r in lad.reports])
    out.plotdata["overlap"] = ([r.s for r in lad.reports], [r.n_measured for r in lad.reports])
    out.check("covers_domain", miss == 0)
    out.check("separated", cov.min_separation_ratio() >= 1 - 1e-9)
    out.check("overlap_bound", lad.holds())
    out.check("overlap_slope", len(lad.reports) < 2 or lad.slope <= lad.bound_exponent)
    out.say(f"{len(cov)} centres, uncovered {miss}, overlap slope {lad.slope:.3f} "
            f"(bound exponent {lad.bound_exponent:.3f})")


def cmd_summability(cfg, out):
    from .covering import summability_sum

    cov = _covering(cfg)
    kappa = cov.kappa
    z = cfg.z[0]
    reps = [summability_sum(cov, z, r, cfg.m, kappa) for r in sorted(cfg.r_ladder)]
    expo = 1.0 / kappa - cfg.m / (1.0 + kappa)
    C = reps[0].total / reps[0].r ** expo
    sums = [r.sum_value for r in reps]
    out.report.update(weight=cov.weight.name, kappa=kappa, m=cfg.m, bound_exponent=expo, fitted_C=C,
                      sums=[r.as_record() for r in reps])
    out.tables["summability"] = (["r", "sum_value", "tail", "bound"],
                                 [(r.r, r.sum_value, r.truncation_tail_bound, C * r.r ** expo) for r in reps])
    out.plotdata["sum_vs_r"] = ([r.r for r in reps], sums)
    out.check("nonincreasing", all(b <= a * (1 + 1e-12) for a, b in zip(sums, sums[1:])))
    out.check("power_bound", all(r.total <= C * r.r ** expo * (1 + 1e-12) for r in reps))
    out.say(f"sums {', '.join(f'{s:.6g}' for s in sums)}; C = {C:.6g}, exponent {expo:.4g}")


def cmd_harmonic(cfg, out):
    from .covering import harmonic_approximation

    w = _weight(cfg)
    rows = []
    for a in cfg.z:
        for sig in cfg.sigma_ladder:
            h = harmonic_approximation(w, a, sig, cfg.degree)
            rows.append((a.real, a.imag, sig, h.a_sigma, h.scale, h.cond))
    out.report.update(weight=w.name, degree=cfg.degree,
                      fits=[dict(zip(["re", "im", "sigma", "a_sigma", "radius", "cond"], r)) for r in rows])
    out.tables["harmonic"] = (["re", "im", "sigma", "a_sigma", "radius", "cond"], rows)
    out.plotdata["a_sigma"] = ([r[2] for r in rows if complex(r[0], r[1]) == cfg.z[0]],
                               [r[3] for r in rows if complex(r[0], r[1]) == cfg.z[0]])
    out.say(" ".join(f"A({r[2]:g})={r[3]:.6g}" for r in rows))


def cmd_density(cfg, out):
    from .regions import density

    w = _weight(cfg)
    E = _region(cfg)
    rep = density(E, w, cfg.r, np.array(cfg.z), cfg.samples_per_disk, cfg.seed)
    out.report.update(weight=w.name, region=E.expr(), density=rep.as_record())
    out.tables["fractions"] = (["re", "im", "fraction"], [(z.real, z.imag, f) for z, f in zip(cfg.z, rep.fractions)])
    out.say(f"gamma = {rep.gamma:.6g} +- {rep.half_width:.2g}")


def cmd_remez(cfg, out):
    from .remez import remez_experiment

    reps = remez_experiment(0j, 1.0, cfg.degree_ladder, cfg.s_fracs, cfg.trials, cfg.seed, cfg.mc_points)
    c = reps[0].fitted_c if reps else float("nan")
    recs = [r.as_record() for r in reps]
    out.report.update(fitted_c=c, cells=recs, trials=cfg.trials, mc_points=cfg.mc_points)
    out.tables["remez"] = (["n", "s_frac", "max_ratio", "cell_c", "bound"],
                           [(r.n, r.s_frac, r.max_ratio, r.cell_c, (c / r.s_frac / math.pi) ** r.n) for r in reps])
    for f in cfg.s_fracs:
        cells = [r for r in reps if abs(r.s_frac - f) < 1e-12]
        out.plotdata[f"ratio_s{f:g}"] = ([r.n for r in cells], [r.max_ratio for r in cells])
    out.check("degree_zero_ratio_one", all(abs(r.max_ratio - 1.0) <= 1e-12 for r in reps if r.n == 0))
    out.check("single_constant", all(r.max_ratio <= (c * r.radius ** 2 / r.s) ** r.n * (1 + 1e-9)
                                     for r in reps if r.n >= 1))
    out.say(f"fitted c = {c:.6g} over {len(reps)} cells")


def cmd_sample(cfg, out):
    from .regions import Full, density
    from .sampling import sampling_constant, sampling_constant_p, theoretical_bound

    w = _weight(cfg)
    E = _region(cfg)
    trunc = _truncation(cfg, w)
    if cfg.p == 2:
        rep = sampling_constant(trunc, E, seed=cfg.seed)
    else:
        rep = sampling_constant_p(trunc, E, cfg.p, seed=cfg.seed)
    if isinstance(E, Full):
        gamma = 1.0
    else:
        gamma = density(E, w, cfg.r, np.array(cfg.z), cfg.samples_per_disk, cfg.seed).gamma
    rep.gamma, rep.r = gamma, cfg.r
    if cfg.r > 1 and gamma > 0:
        from .weights import growth_exponent

        kappa = growth_exponent(w, [cfg.z[0]], cfg.radii).kappa_fit
        rep.L_eval, rep.bound_eval = theoretical_bound(gamma, cfg.r, cfg.p, kappa, cfg.lambdas, cfg.c)
    rep.seeds = {"master": cfg.seed}
    out.report.update(weight=w.name, sampling=rep.as_record(),
                      quadrature={"n_theta": trunc.n_theta, "r_cut": trunc.r_cut, "gl_order": trunc.gl_order})
    out.check("c_emp_in_unit_interval", -1e-12 <= rep.c_emp <= 1 + 1e-8)
    out.say(f"c_emp = {rep.c_emp:.12g}")


def _polka_family(cfg, w):
    from .regions import Complement, Polka
    from .weights import rho

    pitch = cfg.pitch * rho(w, 0j)
    return [Complement(Polka(pitch, d * pitch)) for d in cfg.dots], pitch


def cmd_gamma(cfg, out):
    from .sampling import gamma_dependence_experiment

    w = _weight(cfg)
    trunc = _truncation(cfg, w)
    fam, pitch = _polka_family(cfg, w)
    g = np.linspace(0, pitch, 5, endpoint=False)
    probes = (g[None, :] + 1j * g[:, None]).ravel()
    tab = gamma_dependence_experiment(trunc, fam, cfg.r, cfg.p, probes, cfg.samples_per_disk, cfg.seed)
    out.report.update(weight=w.name, n_max=cfg.nmax, r=cfg.r, p=cfg.p, log_slope=tab.log_slope,
                      r_squared=tab.r_squared, necessity_const=tab.necessity_const,
                      members=list(tab.rows()))
    out.tables["gamma"] = (["region", "gamma", "c_emp", "log_slope"], tab.rows())
    out.plotdata["c_emp_vs_gamma"] = (tab.gammas, tab.c_emps)
    out.check("c_emp_increasing", bool(np.all(np.diff(tab.c_emps) > 0)))
    out.check("loglog_linear", tab.r_squared >= 0.9)
    out.check("necessity_constant_positive", tab.necessity_const > 0)
    out.say(f"slope {tab.log_slope:.4f}, R^2 {tab.r_squared:.4f}, gamma >= {tab.necessity_const:.4g} c^{cfg.p:g}")


def cmd_gooddisks(cfg, out):
    from .covering import overlap_count
    from .sampling import good_disk_classification, random_functions

    w = _weight(cfg)
    trunc = _truncation(cfg, w)
    cov = _covering(cfg, w)
    t = 4 * cfg.s
    n_t = overlap_count(cov, t).n_measured
    rows = []
    for k, f in enumerate(random_functions(trunc.dim, cfg.functions, cfg.seed)):
        rep = good_disk_classification(trunc, cov, f, cfg.s, p_exp=cfg.p, c_frac=cfg.c_frac, n_overlap=n_t)
        rows.append({"function": k, **rep.as_record()})
    fr = [r["captured_fraction"] for r in rows]
    out.report.update(weight=w.name, n_max=cfg.nmax, s=cfg.s, t=t, n_overlap=n_t, c_frac=cfg.c_frac,
                      K=rows[0]["K"] if rows else None, functions=rows, min_captured=min(fr, default=None))
    cols = ["function", "s", "t", "K", "c_frac", "n_overlap", "n_good", "n_disks", "captured_fraction"]
    out.tables["gooddisks"] = (cols, rows)
    out.plotdata["captured"] = (list(range(len(fr))), fr)
    out.check("captured_fraction", all(f >= cfg.c_frac for f in fr))
    out.say(f"min captured fraction {min(fr, default=float('nan')):.6g} over {len(fr)} functions")


def cmd_toeplitz(cfg, out):
    from .toeplitz import assemble_toeplitz, invertibility_check, parse_symbol

    w = _weight(cfg)
    v = parse_symbol(cfg.symbol)
    trunc = _truncation(cfg, w)
    T = assemble_toeplitz(trunc, v, seed=cfg.seed)
    C = cfg.C if cfg.C == "auto" else float(cfg.C)
    rep = invertibility_check(T, v, cfg.level, C, trunc)
    out.report.update(weight=w.name, symbol=v.expr(), n_max=cfg.nmax, invertibility=rep.as_record())
    ev = np.linalg.eigvalsh(T.T)
    out.tables["spectrum"] = (["index", "eigenvalue"], list(enumerate(ev)))
    out.plotdata["spectrum"] = (list(range(len(ev))), ev)
    out.check("invertible", rep.invertible)
    out.check("inverse_norm_bound", rep.bound_holds)
    out.check("proof_step", rep.step_holds)
    out.say(f"inv_norm = {rep.inv_norm:.10g}, bound = {rep.bound:.10g}")


HANDLERS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fockdom", description="Dominating-set experiments in weighted Fock spaces.",
                                allow_abbrev=False)
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="INI file; flags override its values")
    for sec, key, kind, default, hlp in FIELDS:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, metavar=kind.upper(),
                       help=f"[{sec}] {hlp}")
    return p


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for _, key, *_ in FIELDS:
        raw = getattr(args, key)
        if raw is not None:
            cfg.set(key, raw)
    return cfg


def run(subcommand: str, cfg: RunConfig, out_dir=None) -> tuple[int, Outcome]:
    """Execute one pipeline and write its report; returns ``(exit_status, outcome)``.

    Operational errors propagate; a failed check gives status 2.
    """
    out = Outcome()
    HANDLERS[subcommand](cfg, out)
    failed = sorted(k for k, ok in out.checks.items() if not ok)
    out.report.update(subcommand=subcommand, seed=cfg.seed, checks=out.checks,
                      status="invariant_violation" if failed else "ok")
    if out_dir is None:
        out_dir = cfg.out or os.path.join(default_out_root(), subcommand)
    write_report(out_dir, out.report, out.tables, out.plotdata, cfg.to_ini())
    return (2 if failed else 0), out


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "run":
        argv = argv[1:]
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        status, out = run(args.subcommand, cfg)
    except ConfigParseError as exc:
        print(f"fockdom: config error: {exc}", file=sys.stderr)
        return 1
    except InvariantViolation as exc:
        print(f"fockdom: invariant violated: {exc}", file=sys.stderr)
        return 2
    except (FockdomError, ValueError) as exc:
        print(f"fockdom: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for line in out.lines:
        print(line)
    if status == 2:
        failed = ", ".join(k for k, ok in sorted(out.checks.items()) if not ok)
        print(f"fockdom: invariant violated: {failed}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
