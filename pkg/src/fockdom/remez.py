"""Monte Carlo probes of the planar Remez inequality on disks.

For a degree-``n`` polynomial ``p`` on the disk ``G = D(c, R)`` and a target
measure ``s``, ``p`` is rescaled so that ``|{z in G : |p| <= 1}| >= s``; the
ratio ``sup_{dG} |p|`` after rescaling is a lower bound for the extremal
value ``R_n(z, s)``. The rescaling is exact given the Monte Carlo sample: the
scale is ``1/q`` where ``q`` is the order statistic of ``|p|`` that puts a
fraction ``s/|G|`` of the sample in the sublevel set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import HypothesisUnsatisfied, MeasureTargetInfeasible
from .regions import Region

MC_POINTS = 100_000
BOUNDARY_POINTS = 4096
# absolute constant in the eta estimate, fitted once on the test corpus
# (see tests/test_remez.py::test_frozen_eta_constant) and kept fixed
C2_FROZEN = 0.07


@dataclass
class PolynomialSample:
    degree: int
    coeffs: np.ndarray  # ascending powers of u = (z - centre)/radius
    normalization: dict

    def __call__(self, z):
        c, R = self.normalization["center"], self.normalization["radius"]
        u = (np.asarray(z, dtype=complex) - c) / R
        return self.normalization["scale"] * np.polynomial.polynomial.polyval(u, self.coeffs)


@dataclass
class RemezReport:
    center: complex
    radius: float
    s: float
    n: int
    max_ratio: float
    fitted_c: float
    cell_c: float
    trials: int
    seed: int
    argmax: int = -1

    @property
    def s_frac(self) -> float:
        return self.s / (math.pi * self.radius ** 2)

    def as_record(self):
        return {"n": self.n, "s_frac": self.s_frac, "s": self.s, "radius": self.radius,
                "max_ratio": self.max_ratio, "fitted_c": self.fitted_c, "cell_c": self.cell_c,
                "trials": self.trials, "seed": self.seed}


def curated_polynomials(n: int) -> list:
    """Hand-picked polynomials on the unit disk that push the ratio up."""
    if n == 0:
        return [np.array([1.0 + 0j])]
    out = []

    def from_roots(roots):
        return np.poly(np.asarray(roots, dtype=complex))[::-1].astype(complex)

    out.append(from_roots(np.zeros(n)))  # u^n
    out.append(from_roots(np.ones(n)))  # root of order n on the rim
    j = np.arange(1, n + 1)
    cheb = np.cos((2 * j - 1) * math.pi / (2 * n))
    out.append(from_roots(cheb))
    out.append(from_roots(1j * cheb))
    out.append(from_roots(0.98 * np.exp(0.2j * (j - (n + 1) / 2) / n)))
    k = n // 2
    out.append(from_roots(np.r_[np.ones(n - k), -np.ones(k)]))
    return out


def _unit_disk_mc(m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 0x52454D])
    r = np.sqrt(rng.random(m))
    th = 2 * math.pi * rng.random(m)
    return r * np.exp(1j * th)


def _coefficients(n: int, trials: int, seed: int) -> np.ndarray:
    cur = curated_polynomials(n)[:trials]
    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))
    k = trials - len(cur)
    g = (rng.standard_normal((k, n + 1)) + 1j * rng.standard_normal((k, n + 1))) / math.sqrt(2)
    return np.concatenate([np.array(cur).reshape(len(cur), n + 1), g], axis=0)


def _order_index(frac: float, m: int) -> int:
    # smallest k with (k+1)/m >= frac
    return max(int(math.ceil(frac * m - 1e-9)) - 1, 0)


def remez_ratios_for(center: complex, radius: float, n: int, s_values, trials: int, seed: int,
                     mc_points: int = MC_POINTS, boundary_points: int = BOUNDARY_POINTS,
                     point_seed: int | None = None):
    """Per-trial ratios ``sup_dG |p| / q`` for each target measure (columns ordered as given)."""
    area = math.pi * radius ** 2
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    if np.any(s_values <= 0):
        raise ValueError("target measure must be positive")
    if np.any(s_values >= area * (1 - 1e-9)):
        raise MeasureTargetInfeasible(f"s must be below |G| = {area:.6g}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    coeffs = _coefficients(n, trials, seed)
    # evaluate at the actual points of G, then map back to u
    u = _unit_disk_mc(mc_points, seed if point_seed is None else point_seed)
    z = center + radius * u
    zb = center + radius * np.exp(2j * math.pi * np.arange(boundary_points) / boundary_points)
    pts = (z - center) / radius
    bpts = (zb - center) / radius
    ks = np.array([_order_index(s / area, mc_points) for s in s_values])
    return kernels.remez_ratios(coeffs, pts, bpts, ks), coeffs


def remez_experiment(center: complex = 0j, radius: float = 1.0, degrees=range(9), s_fracs=(0.1, 0.25, 0.5, 0.9),
                     trials: int = 10_000, seed: int = 0, mc_points: int = MC_POINTS,
                     boundary_points: int = BOUNDARY_POINTS) -> list:
    """Run every ``(n, s)`` cell and fit one constant ``c`` over the grid.

    ``c`` is the smallest value with ``max_ratio <= (c R^2 / s)^n`` in every
    cell with ``n >= 1``.
    """
    area = math.pi * radius ** 2
    s_values = [f * area for f in s_fracs]
    reps = []
    for n in degrees:
        ratios, _ = remez_ratios_for(center, radius, n, s_values, trials, seed, mc_points, boundary_points)
        for j, s in enumerate(s_values):
            col = ratios[:, j]
            i = int(np.argmax(col))
            mr = float(col[i])
            cell_c = s * mr ** (1.0 / n) / radius ** 2 if n >= 1 else 0.0
            reps.append(RemezReport(center=complex(center), radius=float(radius), s=float(s), n=int(n),
                                    max_ratio=mr, fitted_c=float("nan"), cell_c=cell_c, trials=trials,
                                    seed=seed, argmax=i))
    c = max((r.cell_c for r in reps if r.n >= 1), default=0.0)
    for r in reps:
        r.fitted_c = c
    return reps


def remez_probe(G, n: int, s: float, trials: int, seed: int = 0, mc_points: int = MC_POINTS,
                boundary_points: int = BOUNDARY_POINTS) -> RemezReport:
    """Single ``(n, s)`` cell on ``G = (centre, radius)``."""
    center, radius = G
    area = math.pi * radius ** 2
    rep = remez_experiment(center, radius, [n], [s / area], trials, seed, mc_points, boundary_points)[0]
    rep.s = float(s)
    return rep


def normalized_sample(G, n: int, s: float, trials: int, seed: int, index: int,
                      mc_points: int = MC_POINTS) -> PolynomialSample:
    """Rebuild trial ``index`` of a cell with its scale (reproducible from the seed)."""
    center, radius = G
    coeffs = _coefficients(n, trials, seed)[index]
    u = _unit_disk_mc(mc_points, seed)
    k = _order_index(s / (math.pi * radius ** 2), mc_points)
    q = float(np.partition(np.abs(np.polynomial.polynomial.polyval(u, coeffs)), k)[k])
    return PolynomialSample(degree=n, coeffs=coeffs,
                            normalization={"center": complex(center), "radius": float(radius), "scale": 1.0 / q,
                                           "seed": seed, "index": index, "mc_points": mc_points})


@dataclass
class HomothetyReport:
    n: int
    s_frac: float
    max_abs_diff: float
    ks_pvalue: float
    ratios_a: np.ndarray = field(repr=False)
    ratios_b: np.ndarray = field(repr=False)


def homothety_check(n: int, s_frac: float, trials: int = 2000, seed: int = 0, radius: float = 2.0,
                    mc_points: int = MC_POINTS) -> HomothetyReport:
    """Compare the unit disk with ``D(0, radius)`` at ``s`` scaled by ``radius^2``.

    Same seeds must give the same ratios up to rounding; an independent
    seed on the scaled disk is compared in distribution (two-sample KS).
    """
    from scipy.stats import ks_2samp

    a, _ = remez_ratios_for(0j, 1.0, n, [s_frac * math.pi], trials, seed, mc_points)
    b, _ = remez_ratios_for(0j, radius, n, [s_frac * math.pi * radius ** 2], trials, seed, mc_points)
    c, _ = remez_ratios_for(0j, radius, n, [s_frac * math.pi * radius ** 2], trials, seed + 7919, mc_points)
    skip = len(curated_polynomials(n))
    p = ks_2samp(a[skip:, 0], c[skip:, 0]).pvalue if trials > skip + 1 else 1.0
    return HomothetyReport(n=n, s_frac=s_frac, max_abs_diff=float(np.max(np.abs(a - b) / a)), ks_pvalue=float(p),
                           ratios_a=a[:, 0], ratios_b=c[:, 0])


# --------------------------------------------------------------------------
# Kovrijkine-type local estimate


def eta_bound(r: float, R: float, c2: float = C2_FROZEN) -> float:
    """``c'' R^4/(R-r)^4 ln(R/(R-r))``."""
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    return c2 * R ** 4 / (R - r) ** 4 * math.log(R / (R - r))


def _polar_nodes(radius, n_r, n_th):
    x, wx = np.polynomial.legendre.leggauss(n_r)
    s = 0.5 * radius * (x + 1)
    ws = 0.5 * radius * wx * s
    th = 2 * math.pi * np.arange(n_th) / n_th
    z = (s[:, None] * np.exp(1j * th)[None, :]).ravel()
    wts = np.repeat(ws * (2 * math.pi / n_th), n_th)
    return z, wts


def kovrijkine_check(f, center: complex, rho_value: float, r: float, R: float, E: Region, c: float,
                     p_exp: float = 2.0, c2: float = C2_FROZEN, n_r: int = 96, n_th: int = 256) -> dict:
    """Evaluate both sides of the sup and ``L^p`` local estimates on ``D^r(center)``.

    ``f`` is a vectorised analytic function. ``E`` is intersected with
    ``D^r``; areas and norms use a polar Gauss grid, sups use that grid plus
    the rim of each disk.
    """
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    if not 1 <= p_exp < np.inf:
        raise ValueError("p must lie in [1, inf)")
    center = complex(center)
    rr, RR = r * rho_value, R * rho_value
    zr, wr = _polar_nodes(rr, n_r, n_th)
    zr = center + zr
    rim_r = center + rr * np.exp(2j * math.pi * np.arange(4 * n_th) / (4 * n_th))
    zR, _ = _polar_nodes(RR, n_r, n_th)
    rim_R = center + RR * np.exp(2j * math.pi * np.arange(4 * n_th) / (4 * n_th))
    fr = np.abs(f(zr))
    f_rim = np.abs(f(rim_r))
    lhs_sup = float(max(fr.max(), f_rim.max()))
    if lhs_sup < 1.0:
        raise HypothesisUnsatisfied("no sampled point of D^r reaches modulus 1")
    M = float(max(np.abs(f(center + zR)).max(), np.abs(f(rim_R)).max()))
    inE = E.indicator(zr).astype(bool)
    E_area = float(wr[inE].sum())
    if E_area <= 0:
        raise HypothesisUnsatisfied("E has no area inside D^r")
    sup_E = float(fr[inE].max())
    eta = eta_bound(r, R, c2)
    base = c * rr ** 2 / E_area
    expo = eta * math.log(M)
    lp_D = float((wr * fr ** p_exp).sum() ** (1 / p_exp))
    lp_E = float((wr[inE] * fr[inE] ** p_exp).sum() ** (1 / p_exp))
    # compare in logs: base**expo overflows quickly
    log_rhs_sup = expo * math.log(base) + math.log(sup_E) if sup_E > 0 else -math.inf
    log_rhs_lp = (expo + 1.0 / p_exp) * math.log(base) + math.log(lp_E) if lp_E > 0 else -math.inf
    return {
        "lhs_sup": lhs_sup, "rhs_sup": _exp(log_rhs_sup), "log_slack_sup": log_rhs_sup - math.log(lhs_sup),
        "holds_sup": math.log(lhs_sup) <= log_rhs_sup,
        "lhs_lp": lp_D, "rhs_lp": _exp(log_rhs_lp), "log_slack_lp": log_rhs_lp - math.log(lp_D),
        "holds_lp": math.log(lp_D) <= log_rhs_lp,
        "M": M, "eta": eta, "E_area": E_area, "base": base, "p": p_exp, "c": c, "c2": c2,
        "sup_E": sup_E, "lp_E": lp_E,
    }


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def required_c2(f, center, rho_value, r, R, E, c, p_exp=2.0) -> float:
    """Smallest ``c''`` for which both estimates hold on this instance."""
    rec = kovrijkine_check(f, center, rho_value, r, R, E, c, p_exp, c2=1.0)
    unit = rec["eta"]
    lnM, lnb = math.log(rec["M"]), math.log(rec["base"])
    gap_sup = math.log(rec["lhs_sup"]) - math.log(rec["sup_E"])
    gap_lp = math.log(rec["lhs_lp"]) - math.log(rec["lp_E"]) - lnb / p_exp
    need = max(gap_sup, gap_lp, 0.0)
    if need == 0.0:
        return 0.0
    if lnM <= 0 or lnb <= 0:
        return math.inf
    return float(need / (lnb * unit * lnM))
