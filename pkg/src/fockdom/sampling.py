"""Sampling constants of truncated weighted Fock spaces.

For a radial weight the monomials are orthogonal, so ``e_n = z^n / ||z^n||``
is an orthonormal basis of the polynomials of degree ``<= n_max``. Integrals
over a region ``E`` are taken along rays from the origin: for each of
``n_theta`` equispaced angles the region returns its exact radial intervals,
which are integrated with composite Gauss-Legendre panels. The angular rule
is exact for the full plane once ``n_theta > 2*n_max``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import CoveringWeightMismatch, NonRadialWeight, QuadratureUnderResolved
from .regions import Complement, Empty, Full, Intersection, Region, Union, area, density
from .weights import WeightSpec

TAIL_TOL = 1e-10


def _log_radial_moment(w: WeightSpec, n: int, lo: float = 0.0, hi: float = np.inf) -> float:
    """``log( 2*pi * int_lo^hi s^(2n+1) exp(-2 w(s)) ds )``, scaled to avoid overflow."""
    prof = w.radial_profile

    def logf(s):
        return (2 * n + 1) * math.log(s) - 2.0 * float(prof(s)) if s > 0 else -np.inf

    # peak of the integrand on (0, inf) by golden search over log s
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda u: -logf(math.exp(u)), bounds=(-20.0, 20.0), method="bounded",
                          options={"xatol": 1e-10})
    s_pk = math.exp(res.x)
    shift = logf(s_pk)
    pts = [p for p in (s_pk,) if lo < p < hi]
    val, _ = integrate.quad(lambda s: math.exp(logf(s) - shift), lo, hi, points=pts or None,
                            epsabs=0.0, epsrel=1e-13, limit=400) if np.isfinite(hi) else \
        integrate.quad(lambda s: math.exp(logf(s) - shift), lo, hi, epsabs=0.0, epsrel=1e-13, limit=400)
    if val <= 0:
        return -np.inf
    return math.log(2 * math.pi) + shift + math.log(val)


def _radial_panels(r_cut: float, n_uniform: int = 32, n_geometric: int = 10):
    # uniform panels, with the first one split geometrically towards 0 so
    # profiles like s^alpha (alpha < 1) stay resolved
    edges = list(np.linspace(0.0, r_cut, n_uniform + 1))
    first = edges[1]
    geo = [first * 2.0 ** (-k) for k in range(n_geometric, 0, -1)]
    return np.array([0.0] + geo + edges[1:])


def covers_exterior(E: Region, radius: float) -> bool:
    """True when ``E`` provably contains every point with ``|z| >= radius``."""
    if isinstance(E, Full):
        return True
    if isinstance(E, Complement):
        box = E.inner.bbox()
        if box is None:
            return False
        x0, y0, x1, y1 = box
        return max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1)) < radius
    if isinstance(E, Union):
        return any(covers_exterior(p, radius) for p in E.parts)
    if isinstance(E, Intersection):
        return all(covers_exterior(p, radius) for p in E.parts)
    return False


@dataclass
class FockTruncation:
    """Orthonormal monomial basis of the weighted space up to degree ``n_max``."""

    weight: WeightSpec
    n_max: int
    log_norms2: np.ndarray
    r_cut: float
    n_theta: int = 512
    gl_order: int = 12
    panels: np.ndarray = field(default=None, repr=False)
    tail: np.ndarray = field(default=None, repr=False)  # share of ||e_n||^2 beyond r_cut

    def __post_init__(self):
        if self.panels is None:
            self.panels = _radial_panels(self.r_cut)
        if self.tail is None:
            self.tail = np.array([math.exp(_log_radial_moment(self.weight, n, self.r_cut) - self.log_norms2[n])
                                  for n in range(self.n_max + 1)])
        self._gl = np.polynomial.legendre.leggauss(self.gl_order)
        self._node_cache = {}

    @property
    def dim(self) -> int:
        return self.n_max + 1

    @property
    def thetas(self) -> np.ndarray:
        return 2 * math.pi * np.arange(self.n_theta) / self.n_theta

    def weighted_basis(self, z) -> np.ndarray:
        """``e_n(z) * exp(-w(z))`` for every node (rows) and degree (columns)."""
        z = np.asarray(z, dtype=complex).ravel()
        s = np.abs(z)
        th = np.angle(z)
        n = np.arange(self.dim)
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.log(s)
            mag = n[None, :] * logs[:, None] - 0.5 * self.log_norms2[None, :] \
                - np.asarray(self.weight.radial_profile(s))[:, None]
        mag = np.where(np.isneginf(logs)[:, None] & (n[None, :] == 0),
                       -0.5 * self.log_norms2[None, :] - self.weight.radial_profile(0.0), mag)
        return np.exp(mag) * np.exp(1j * th[:, None] * n[None, :])

    def _radial_nodes(self, a, b):
        x, wx = self._gl
        cuts = self.panels[(self.panels > a) & (self.panels < b)]
        edges = np.concatenate([[a], cuts, [b]])
        lo, hi = edges[:-1], edges[1:]
        half = 0.5 * (hi - lo)
        s = (lo + half)[:, None] + half[:, None] * x[None, :]
        ws = half[:, None] * wx[None, :]
        return s.ravel(), ws.ravel()

    def nodes(self, E: Region):
        """Quadrature nodes and area weights for ``E`` intersected with the cutoff disk."""
        key = E.expr()
        hit = self._node_cache.get(key)
        if hit is not None:
            return hit
        zs, ws = [], []
        dth = 2 * math.pi / self.n_theta
        if isinstance(E, Empty):
            out = (np.zeros(0, dtype=complex), np.zeros(0))
            self._node_cache[key] = out
            return out
        for th in self.thetas:
            iv = [(0.0, self.r_cut)] if isinstance(E, Full) else E.ray_intervals(th, self.r_cut)
            e = complex(math.cos(th), math.sin(th))
            for a, b in iv:
                s, wr = self._radial_nodes(a, b)
                zs.append(s * e)
                ws.append(wr * s * dth)
        out = (np.concatenate(zs) if zs else np.zeros(0, dtype=complex),
               np.concatenate(ws) if ws else np.zeros(0))
        if len(self._node_cache) > 64:
            self._node_cache.clear()
        self._node_cache[key] = out
        return out

    def masked_gram(self, E: Region, block: int = 65536) -> np.ndarray:
        """``M_jk = int_E e_j conj(e_k) exp(-2w) dA`` (Hermitian).

        When ``E`` contains everything beyond ``r_cut`` the exact (diagonal)
        tail is added; otherwise the part of ``E`` outside the cutoff disk is
        dropped, an error below the tail tolerance.
        """
        z, wq = self.nodes(E)
        M = np.zeros((self.dim, self.dim), dtype=complex)
        for b0 in range(0, z.size, block):
            V = self.weighted_basis(z[b0:b0 + block])
            M += (V.T * wq[b0:b0 + block]) @ V.conj()
        if covers_exterior(E, self.r_cut):
            M += np.diag(self.tail)
        return 0.5 * (M + M.conj().T)

    def quadrature_area(self, E: Region) -> float:
        return float(np.sum(self.nodes(E)[1]))

    def evaluate(self, coeffs, z) -> np.ndarray:
        """``f(z) exp(-w(z))`` for ``f = sum c_n e_n``."""
        return self.weighted_basis(z) @ np.asarray(coeffs, dtype=complex)


def build_truncation(w: WeightSpec, n_max: int, tol: float = TAIL_TOL, n_theta: int | None = None,
                     gl_order: int = 12) -> FockTruncation:
    """Normalise ``z^0 .. z^n_max`` and choose a cutoff radius.

    ``r_cut`` is the smallest radius (to 1%) beyond which every basis
    function carries less than ``tol`` of its squared norm.
    """
    if not w.is_radial:
        raise NonRadialWeight(f"weight {w.name!r} is not radial; monomials are not orthogonal")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    log_norms2 = np.array([_log_radial_moment(w, n) for n in range(n_max + 1)])

    def tail(n, R):
        return math.exp(_log_radial_moment(w, n, R) - log_norms2[n])

    R = 1.0
    while tail(n_max, R) > tol or tail(0, R) > tol:
        R *= 1.25
    lo = R / 1.25
    while R - lo > 0.01 * R:
        mid = 0.5 * (lo + R)
        if tail(n_max, mid) > tol or tail(0, mid) > tol:
            lo = mid
        else:
            R = mid
    if n_theta is None:
        n_theta = max(512, 4 * (n_max + 1))
    return FockTruncation(weight=w, n_max=n_max, log_norms2=log_norms2, r_cut=R, n_theta=n_theta,
                          gl_order=gl_order)


# --------------------------------------------------------------------------
# sampling constants


@dataclass
class SamplingReport:
    region: str
    n_max: int
    c_emp: float
    lambda_min: float
    p_exp: float = 2.0
    gamma: float | None = None
    r: float | None = None
    L_eval: float | None = None
    bound_eval: float | None = None
    seeds: dict = field(default_factory=dict)
    upper_bound_only: bool = False

    def as_record(self) -> dict:
        return {
            "region": self.region, "n_max": self.n_max, "p": self.p_exp, "c_emp": self.c_emp,
            "lambda_min": self.lambda_min, "gamma": self.gamma, "r": self.r, "L_eval": self.L_eval,
            "bound_eval": self.bound_eval, "upper_bound_only": self.upper_bound_only,
            "seeds": dict(self.seeds),
        }


def _area_check(trunc: FockTruncation, E: Region, seed: int, n: int = 200_000):
    if isinstance(E, (Full, Empty)):
        return
    R = trunc.r_cut
    q = trunc.quadrature_area(E)
    rng = np.random.default_rng([seed, 0x5A17])
    u = rng.random(n)
    th = 2 * math.pi * rng.random(n)
    z = R * np.sqrt(u) * np.exp(1j * th)
    frac = float(E.indicator(z).mean())
    disk = math.pi * R * R
    mc = disk * frac
    se = disk * math.sqrt(max(frac * (1 - frac), 1.0 / n) / n)
    if abs(q - mc) > 3 * se + 1e-9 * disk:
        raise QuadratureUnderResolved(
            f"quadrature area {q:.6g} of {E} disagrees with Monte Carlo {mc:.6g} +- {se:.2g}")


def sampling_constant(trunc: FockTruncation, E: Region, tol: float = 1e-12, check_area: bool = True,
                      seed: int = 0) -> SamplingReport:
    """Exact sampling constant of the truncated space for p = 2: ``sqrt(lambda_min(M_E))``."""
    if check_area:
        _area_check(trunc, E, seed)
    M = trunc.masked_gram(E)
    lam = float(np.linalg.eigvalsh(M)[0])
    c = math.sqrt(min(max(lam, 0.0), 1.0)) if lam > -tol else 0.0
    return SamplingReport(region=E.expr(), n_max=trunc.n_max, c_emp=c, lambda_min=lam,
                          seeds={"area_check": seed})


def sampling_constant_p(trunc: FockTruncation, E: Region, p_exp: float, trials: int = 2000,
                        seed: int = 0) -> SamplingReport:
    """Random-search estimate for ``p != 2``; an upper bound on the true constant.

    Minimises ``(int_E |f|^p e^{-pw} / int |f|^p e^{-pw})^(1/p)`` over seeded
    complex Gaussian coefficient vectors plus the basis vectors themselves.
    """
    zE, wE = trunc.nodes(E)
    zF, wF = trunc.nodes(Full())
    VE = trunc.weighted_basis(zE) if zE.size else np.zeros((0, trunc.dim))
    VF = trunc.weighted_basis(zF)
    rng = np.random.default_rng([seed, 0x9E])
    C = rng.standard_normal((trunc.dim, trials)) + 1j * rng.standard_normal((trunc.dim, trials))
    C = np.concatenate([np.eye(trunc.dim), C], axis=1)
    num = (wE[:, None] * np.abs(VE @ C) ** p_exp).sum(axis=0) if zE.size else np.zeros(C.shape[1])
    den = (wF[:, None] * np.abs(VF @ C) ** p_exp).sum(axis=0)
    ratio = (num / den) ** (1.0 / p_exp)
    return SamplingReport(region=E.expr(), n_max=trunc.n_max, c_emp=float(ratio.min()),
                          lambda_min=float("nan"), p_exp=p_exp, seeds={"search": seed},
                          upper_bound_only=True)


def theoretical_bound(gamma: float, r: float, p_exp: float, kappa: float,
                      lambdas=(1.0, 1.0, 1.0), c: float = math.e):
    """``L = lam*r^(1/kappa) + (lam' + lam''*ln(1+r))/p`` and ``(gamma/c)^L``."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if not r > 1:
        raise ValueError("the exponent formula is stated for r > 1")
    lam, lam1, lam2 = lambdas
    if min(lam, lam1, lam2, c, kappa, p_exp) <= 0:
        raise ValueError("all constants must be positive")
    if gamma / c > 1:
        warnings.warn("gamma/c > 1: the bound exceeds 1 and says nothing", stacklevel=2)
    L = lam * r ** (1.0 / kappa)
    if np.isfinite(p_exp):
        L += (lam1 + lam2 * math.log1p(r)) / p_exp
    return L, (gamma / c) ** L


# --------------------------------------------------------------------------
# gamma dependence


@dataclass
class GammaTable:
    gammas: np.ndarray
    c_emps: np.ndarray
    regions: list
    log_slope: float
    r_squared: float
    necessity_const: float
    p_exp: float
    half_widths: np.ndarray = None

    def rows(self):
        for E, g, c in zip(self.regions, self.gammas, self.c_emps):
            yield {"region": E, "gamma": float(g), "c_emp": float(c), "log_slope": self.log_slope}


def gamma_dependence_experiment(trunc: FockTruncation, family, r: float, p_exp: float = 2.0,
                                probes=None, samples_per_disk: int = 4096, seed: int = 0) -> GammaTable:
    """Density and sampling constant for each member of a family of sets.

    Fits ``log c_emp`` against ``log gamma`` and reports the largest constant
    ``k`` with ``gamma >= k * c_emp^p`` on the family.
    """
    family = list(family)
    if probes is None:
        probes = np.array([0j])
    gs, hw, cs = [], [], []
    for k, E in enumerate(family):
        d = density(E, trunc.weight, r, probes, samples_per_disk, seed=seed + k)
        gs.append(d.gamma)
        hw.append(d.half_width)
        if p_exp == 2:
            cs.append(sampling_constant(trunc, E, seed=seed + k).c_emp)
        else:
            cs.append(sampling_constant_p(trunc, E, p_exp, seed=seed + k).c_emp)
    gs, cs = np.array(gs), np.array(cs)
    order = np.argsort(gs, kind="stable")
    if len(gs) > 1 and np.any(np.diff(gs[order]) <= 0):
        raise ValueError("family members must have strictly ordered densities")
    gs, cs, hw = gs[order], cs[order], np.array(hw)[order]
    regions = [family[i].expr() for i in order]
    if len(gs) >= 2 and np.all(gs > 0) and np.all(cs > 0):
        lx, ly = np.log(gs), np.log(cs)
        slope, icpt = np.polyfit(lx, ly, 1)
        resid = ly - (slope * lx + icpt)
        sst = np.sum((ly - ly.mean()) ** 2)
        r2 = 1.0 - np.sum(resid ** 2) / sst if sst > 0 else 1.0
    else:
        slope, r2 = float("nan"), float("nan")
    with np.errstate(divide="ignore"):
        nec = float(np.min(gs / cs ** p_exp))
    return GammaTable(gammas=gs, c_emps=cs, regions=regions, log_slope=float(slope), r_squared=float(r2),
                      necessity_const=nec, p_exp=p_exp, half_widths=hw)


# --------------------------------------------------------------------------
# K-good disks


@dataclass
class GoodDiskReport:
    s: float
    t: float
    K: float
    c_frac: float
    good_indices: np.ndarray
    captured_fraction: float
    n_overlap: int
    local_s: np.ndarray = field(repr=False, default=None)
    local_t: np.ndarray = field(repr=False, default=None)
    total: float = float("nan")

    def as_record(self) -> dict:
        return {"s": self.s, "t": self.t, "K": self.K, "c_frac": self.c_frac, "n_overlap": self.n_overlap,
                "n_good": int(len(self.good_indices)), "n_disks": int(len(self.local_s)),
                "captured_fraction": self.captured_fraction}


def random_functions(dim: int, count: int, seed: int) -> np.ndarray:
    """Seeded complex Gaussian coefficient vectors of unit norm, one stream per function."""
    out = np.empty((count, dim), dtype=complex)
    for k in range(count):
        rng = np.random.default_rng([seed, 0x474F4F44, k])
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        out[k] = v / np.linalg.norm(v)
    return out


def _grid_density(trunc: FockTruncation, coeffs, grid, p_exp: float):
    x0, x1, nx, y0, y1, ny = grid
    xs, ys = np.linspace(x0, x1, nx), np.linspace(y0, y1, ny)
    cell = (xs[1] - xs[0]) * (ys[1] - ys[0])
    Z = xs[None, :] + 1j * ys[:, None]
    return np.abs(trunc.evaluate(coeffs, Z.ravel())).reshape(Z.shape) ** p_exp * cell


def local_norms(trunc: FockTruncation, coeffs, centers, radii, grid, p_exp: float = 2.0, dens=None):
    """``int_{D(a_k, radius_k)} |f|^p e^{-pw} dA`` by a midpoint rule on ``grid``.

    Returns the per-disk values and the grid total (the same discrete measure).
    ``dens`` lets callers reuse the grid values of ``|f|^p e^{-pw}`` times the cell area.
    """
    from .kernels import stamp

    if dens is None:
        dens = _grid_density(trunc, coeffs, grid, p_exp)
    centers = np.asarray(centers)
    _, sums = stamp(grid, centers.real, centers.imag, np.asarray(radii, dtype=float), dens)
    return sums, float(dens.sum())


def good_disk_classification(trunc: FockTruncation, cov, coeffs, s: float, K: float | None = None,
                             p_exp: float = 2.0, c_frac: float = 0.5, grid_n: int = 600,
                             n_overlap: int | None = None) -> GoodDiskReport:
    """Classify ``D^s(a_k)`` as K-good when ``||f||_{D^t} <= K ||f||_{D^s}`` with ``t = 4s``.

    Without an explicit ``K`` the choice ``K^p = N(t)/(1 - c_frac)`` is used,
    ``N(t)`` being the measured overlap of the ``t``-disks. The captured
    fraction is measured against the same discrete measure as the local norms.
    """
    from .covering import overlap_count

    if cov.weight.name != trunc.weight.name:
        raise CoveringWeightMismatch(f"covering built for {cov.weight.name!r}, space uses {trunc.weight.name!r}")
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.shape != (trunc.dim,):
        raise ValueError(f"expected {trunc.dim} coefficients")
    if not np.any(coeffs):
        raise ValueError("f must be non-zero")
    t = 4.0 * s
    if n_overlap is None:
        n_overlap = overlap_count(cov, t).n_measured
    if K is None:
        K = (n_overlap / (1.0 - c_frac)) ** (1.0 / p_exp)
    x0, y0, x1, y1 = cov.domain
    grid = (x0, x1, grid_n, y0, y1, grid_n)
    dens = _grid_density(trunc, coeffs, grid, p_exp)
    ls, total = local_norms(trunc, coeffs, cov.centers, s * cov.rhos, grid, p_exp, dens)
    lt, _ = local_norms(trunc, coeffs, cov.centers, t * cov.rhos, grid, p_exp, dens)
    good = np.flatnonzero(lt ** (1.0 / p_exp) <= K * ls ** (1.0 / p_exp))
    captured = float(ls[good].sum() / total)
    return GoodDiskReport(s=s, t=t, K=float(K), c_frac=c_frac, good_indices=good, captured_fraction=captured,
                          n_overlap=int(n_overlap), local_s=ls, local_t=lt, total=total)
