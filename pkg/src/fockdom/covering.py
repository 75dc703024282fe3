"""Separated nets, overlap counts, lattice sums and local harmonic fits.

The covering is a greedy maximal separated net: candidates on a fine
square grid are scanned row by row (increasing imaginary part, then real
part) and kept when they sit at least ``delta*max(rho_i, rho_j)`` from every
kept centre.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import DomainTooSmall, EmptyGrid, ExponentTooSmall, IllConditionedFit, MassNeverReachesOne
from .weights import WeightSpec, growth_exponent, rho, rho_field

MAX_CANDIDATES = 4_000_000


@dataclass
class Covering:
    weight: WeightSpec
    centers: np.ndarray
    rhos: np.ndarray
    delta: float
    domain: tuple
    r0_effective: float
    s: float = None
    probe_n: int = 200
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.s is None:
            self.s = self.r0_effective

    def __len__(self):
        return len(self.centers)

    @property
    def kappa(self) -> float:
        """Growth exponent fitted once per covering (at the domain centre and corners)."""
        k = self._cache.get("kappa")
        if k is None:
            x0, y0, x1, y1 = self.domain
            pts = [complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), complex(x0, y0), complex(x1, y1)]
            k = growth_exponent(self.weight, pts, [1.5, 2.0, 4.0, 8.0]).kappa_fit
            self._cache["kappa"] = k
        return k

    def rows(self):
        for k, (a, r) in enumerate(zip(self.centers, self.rhos)):
            yield {"k": k, "re": float(a.real), "im": float(a.imag), "rho": float(r)}

    def min_separation_ratio(self) -> float:
        """``min |a_i - a_j| / (delta*max(rho_i, rho_j))`` over all pairs (>= 1 when separated)."""
        from scipy.spatial import cKDTree

        if len(self.centers) < 2:
            return np.inf
        xy = np.column_stack([self.centers.real, self.centers.imag])
        tree = cKDTree(xy)
        reach = self.delta * self.rhos.max()
        pairs = tree.query_pairs(reach * (1 + 1e-12), output_type="ndarray")
        if len(pairs) == 0:
            return np.inf
        i, j = pairs[:, 0], pairs[:, 1]
        d = np.abs(self.centers[i] - self.centers[j])
        return float(np.min(d / (self.delta * np.maximum(self.rhos[i], self.rhos[j]))))


def _probe_axes(domain, n):
    x0, y0, x1, y1 = domain
    nx = n if x1 > x0 else 1
    ny = n if y1 > y0 else 1
    return (x0, x1, nx, y0, y1, ny)


def _grid_points(grid):
    x0, x1, nx, y0, y1, ny = grid
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def build_covering(w: WeightSpec, domain, delta: float = 0.25, probe_n: int = 200) -> Covering:
    """Greedy maximal ``delta``-separated net over ``domain = (x0, y0, x1, y1)``.

    The candidate pitch is ``delta*rho_min/2`` so maximality leaves no gap
    wider than about ``delta*rho``. ``r0_effective`` is the smallest
    multiplier covering every point of a ``probe_n`` x ``probe_n`` grid.
    """
    x0, y0, x1, y1 = (float(v) for v in domain)
    if not (x1 >= x0 and y1 >= y0):
        raise DomainTooSmall(f"degenerate domain {domain}")
    if not 0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    coarse = _grid_points(_probe_axes((x0, y0, x1, y1), 33))
    rho_min = float(rho_field(w, coarse).min())
    h = delta * rho_min / 2.0
    nx = int(math.floor((x1 - x0) / h)) + 1
    ny = int(math.floor((y1 - y0) / h)) + 1
    if nx * ny > MAX_CANDIDATES:
        h = math.sqrt((x1 - x0 + h) * (y1 - y0 + h) / MAX_CANDIDATES)
        nx = int(math.floor((x1 - x0) / h)) + 1
        ny = int(math.floor((y1 - y0) / h)) + 1
    xs = x0 + h * np.arange(nx)
    ys = y0 + h * np.arange(ny)
    cand = (xs[None, :] + 1j * ys[:, None]).ravel()  # raster order: Im outer, Re inner
    crho = rho_field(w, cand)
    if not np.all(np.isfinite(crho)) or cand.size == 0:
        raise DomainTooSmall("no admissible centre in the domain")
    cell = max(delta * float(crho.max()), 1e-12)
    gnx = int((x1 - x0) / cell) + 1
    gny = int((y1 - y0) / cell) + 1
    keep = kernels.greedy_net(cand.real, cand.imag, crho, delta, x0, y0, cell, gnx, gny)
    if keep.size == 0:
        raise DomainTooSmall("no admissible centre in the domain")
    centers, rhos = cand[keep], crho[keep]
    probes = _grid_points(_probe_axes((x0, y0, x1, y1), probe_n))
    dist = kernels.min_scaled_distance(probes.real, probes.imag, centers.real, centers.imag, rhos)
    r0 = max(float(dist.max()) * (1 + 1e-9), 1e-12)
    return Covering(weight=w, centers=centers, rhos=rhos, delta=float(delta), domain=(x0, y0, x1, y1),
                    r0_effective=r0, probe_n=probe_n)


def uncovered_points(cov: Covering, s: float | None = None, probe_n: int | None = None) -> int:
    """Number of probe-grid points of the domain outside every ``D^s(a_k)``."""
    s = cov.r0_effective if s is None else s
    grid = _probe_axes(cov.domain, probe_n or cov.probe_n)
    counts, _ = kernels.stamp(grid, cov.centers.real, cov.centers.imag, s * cov.rhos)
    return int(np.sum(counts == 0))


# --------------------------------------------------------------------------
# overlap


@dataclass
class OverlapReport:
    n_measured: int
    mean_count: float
    s: float
    bound_exponent: float
    epsilon: float
    c_ov_fit: float
    probe_grid: tuple = None

    def as_record(self):
        return {"s": self.s, "n_measured": self.n_measured, "mean_count": self.mean_count,
                "bound_exponent": self.bound_exponent, "epsilon": self.epsilon, "c_ov_fit": self.c_ov_fit}


def overlap_count(cov: Covering, s: float, probe_grid=None, epsilon: float = 0.1, kappa: float | None = None,
                  probe_n: int | None = None) -> OverlapReport:
    """Largest number of disks ``D^s(a_k)`` containing a probe point.

    The default probe grid is the domain shrunk by the largest disk radius so
    points near the boundary do not under-count.
    """
    if s <= 0:
        raise ValueError("s must be positive")
    if probe_grid is None:
        pad = s * float(cov.rhos.max())
        x0, y0, x1, y1 = cov.domain
        inner = (x0 + pad, y0 + pad, x1 - pad, y1 - pad)
        if inner[2] < inner[0] or inner[3] < inner[1]:
            raise EmptyGrid(f"domain too small for s={s}: nothing left after shrinking by {pad:.3g}")
        probe_grid = _probe_axes(inner, probe_n or cov.probe_n)
    if probe_grid[2] < 1 or probe_grid[5] < 1:
        raise EmptyGrid("probe grid has no points")
    counts, _ = kernels.stamp(probe_grid, cov.centers.real, cov.centers.imag, s * cov.rhos)
    kappa = cov.kappa if kappa is None else kappa
    expo = 1.0 + 1.0 / kappa + kappa * epsilon / (1.0 + kappa)
    n = int(counts.max())
    return OverlapReport(n_measured=n, mean_count=float(counts.mean()), s=float(s), bound_exponent=expo,
                         epsilon=epsilon, c_ov_fit=n / (1.0 + s) ** expo, probe_grid=tuple(probe_grid))


@dataclass
class OverlapLadder:
    reports: list
    c_ov_fit: float
    slope: float
    bound_exponent: float

    def holds(self) -> bool:
        return all(r.n_measured <= self.c_ov_fit * (1 + r.s) ** self.bound_exponent * (1 + 1e-12)
                   for r in self.reports)


def overlap_ladder(cov: Covering, s_ladder, epsilon: float = 0.1, kappa: float | None = None,
                   probe_n: int | None = None) -> OverlapLadder:
    """Overlap over several multipliers, one shared constant and the log-log slope."""
    s_ladder = sorted(float(s) for s in s_ladder)
    if not s_ladder:
        raise EmptyGrid("empty s ladder")
    # a common probe grid: the domain shrunk by the largest radius in the ladder
    pad = max(s_ladder) * float(cov.rhos.max())
    x0, y0, x1, y1 = cov.domain
    inner = (x0 + pad, y0 + pad, x1 - pad, y1 - pad)
    if inner[2] < inner[0] or inner[3] < inner[1]:
        raise EmptyGrid("domain too small for the largest multiplier")
    grid = _probe_axes(inner, probe_n or cov.probe_n)
    reps = [overlap_count(cov, s, grid, epsilon, kappa) for s in s_ladder]
    c = max(r.c_ov_fit for r in reps)
    for r in reps:
        r.c_ov_fit = c
    if len(reps) >= 2:
        slope = float(np.polyfit(np.log1p(s_ladder), np.log([r.n_measured for r in reps]), 1)[0])
    else:
        slope = float("nan")
    return OverlapLadder(reports=reps, c_ov_fit=c, slope=slope, bound_exponent=reps[0].bound_exponent)


class DiskCount(NamedTuple):
    count: int
    boundary_truncated: bool


def cardinality_in_disk(cov: Covering, z: complex, s: float) -> DiskCount:
    """``#{k : a_k in D^s(z)}``, flagged when ``D^s(z)`` leaves the domain."""
    if s <= 1:
        raise ValueError("cardinality bound is stated for s > 1")
    z = complex(z)
    rad = s * rho(cov.weight, z)
    n = int(np.sum(np.abs(cov.centers - z) < rad))
    x0, y0, x1, y1 = cov.domain
    inside = (z.real - rad >= x0) and (z.real + rad <= x1) and (z.imag - rad >= y0) and (z.imag + rad <= y1)
    return DiskCount(n, not inside)


# --------------------------------------------------------------------------
# lattice sums


@dataclass
class SummabilityReport:
    z: complex
    r: float
    m: float
    sum_value: float
    truncation_tail_bound: float
    n_terms: int

    @property
    def total(self) -> float:
        return self.sum_value + self.truncation_tail_bound

    def as_record(self):
        return {"z_re": self.z.real, "z_im": self.z.imag, "r": self.r, "m": self.m, "sum_value": self.sum_value,
                "truncation_tail_bound": self.truncation_tail_bound, "n_terms": self.n_terms}


def summability_sum(cov: Covering, z: complex, r: float, m: float, kappa: float | None = None) -> SummabilityReport:
    """``sum_{a_k not in D^r(z)} (rho(a_k)/|z - a_k|)^m`` plus a tail estimate.

    The tail treats the centres beyond the domain as a uniform density equal
    to the one observed inside it, with ``rho`` frozen at its largest value.
    """
    kappa = cov.kappa if kappa is None else kappa
    if m <= 1.0 + 1.0 / kappa:
        raise ExponentTooSmall(f"m={m} must exceed 1 + 1/kappa = {1 + 1 / kappa:g}")
    if r < 1:
        raise ValueError("r must be at least 1")
    z = complex(z)
    d = np.abs(cov.centers - z)
    outside = d >= r * rho(cov.weight, z)
    terms = (cov.rhos[outside] / d[outside]) ** m
    total = float(np.sum(np.sort(terms)))  # ascending order for a stable sum
    x0, y0, x1, y1 = cov.domain
    dist = min(z.real - x0, x1 - z.real, z.imag - y0, y1 - z.imag)
    dom_area = (x1 - x0) * (y1 - y0)
    if dist <= 0 or dom_area <= 0:
        tail = np.inf
    elif m <= 2:
        tail = np.inf
    else:
        dens = len(cov.centers) / dom_area
        rmax = float(cov.rhos.max())
        tail = 2 * math.pi * dens * rmax ** m * dist ** (2 - m) / (m - 2)
    return SummabilityReport(z=z, r=float(r), m=float(m), sum_value=total, truncation_tail_bound=float(tail),
                             n_terms=int(outside.sum()))


# --------------------------------------------------------------------------
# harmonic approximation


@dataclass
class HarmonicApprox:
    center: complex
    sigma: float
    degree: int
    scale: float
    h_coeffs: np.ndarray  # (degree, 2): multipliers of Re (z-a)^j and Im (z-a)^j, j = 1..degree
    a_sigma: float
    holo_completion: np.ndarray  # H(z) = sum_j d_j (z-a)^j, index 0 is the (zero) constant term
    cond: float

    def _u(self, z):
        return (np.asarray(z, dtype=complex) - self.center) / self.scale

    def h(self, z):
        u = self._u(z)
        b = self.h_coeffs[:, 0] * self.scale ** np.arange(1, self.degree + 1)
        c = self.h_coeffs[:, 1] * self.scale ** np.arange(1, self.degree + 1)
        out = np.zeros(u.shape)
        p = np.ones_like(u)
        for j in range(self.degree):
            p = p * u
            out += b[j] * p.real + c[j] * p.imag
        return out

    def H(self, z):
        u = self._u(z)
        d = self.holo_completion * self.scale ** np.arange(self.degree + 1)
        return np.polynomial.polynomial.polyval(u, d)


def _unit_disk_grid(n_r, n_th, include_rim=False):
    if include_rim:
        r = np.linspace(0.0, 1.0, n_r)
    else:
        x, _ = np.polynomial.legendre.leggauss(n_r)
        r = 0.5 * (x + 1)
    th = 2 * math.pi * (np.arange(n_th) + 0.5) / n_th
    return (r[:, None] * np.exp(1j * th)[None, :]).ravel(), r


def harmonic_approximation(w: WeightSpec, a: complex, sigma: float, degree: int = 6,
                           rho_value: float | None = None, cond_max: float = 1e12) -> HarmonicApprox:
    """Least-squares harmonic polynomial ``h`` with ``h(a) = 0`` fitted to ``w - w(a)`` on ``D^sigma(a)``.

    The fit runs in the normalised variable ``u = (z - a)/(sigma*rho(a))``.
    ``a_sigma`` is the sup residual over a finer polar grid including the rim.
    Weights whose mass never reaches one (harmonic weights) fall back to
    ``rho = 1`` unless ``rho_value`` is given.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    a = complex(a)
    if rho_value is None:
        try:
            rho_value = rho(w, a)
        except MassNeverReachesOne:
            rho_value = 1.0
    scale = sigma * rho_value
    u, _ = _unit_disk_grid(2 * degree + 8, 4 * degree + 16)
    powers = u[:, None] ** np.arange(1, degree + 1)[None, :]
    A = np.concatenate([powers.real, powers.imag], axis=1)
    # area weights of the polar Gauss grid are proportional to r
    sw = np.sqrt(np.abs(u))
    target = np.asarray(w.eval(a + scale * u), dtype=float) - float(w.eval(a))
    cond = float(np.linalg.cond(A * sw[:, None]) ** 2)
    if not np.isfinite(cond) or cond > cond_max:
        raise IllConditionedFit(f"normal system condition {cond:.3g} exceeds {cond_max:g}; reduce the degree")
    coef, *_ = np.linalg.lstsq(A * sw[:, None], target * sw, rcond=None)
    b, c = coef[:degree], coef[degree:]
    uf, _ = _unit_disk_grid(8 * degree + 33, 16 * degree + 64, include_rim=True)
    pf = uf[:, None] ** np.arange(1, degree + 1)[None, :]
    resid = np.asarray(w.eval(a + scale * uf), dtype=float) - float(w.eval(a)) - (pf.real @ b + pf.imag @ c)
    jj = np.arange(1, degree + 1)
    h_coeffs = np.column_stack([b / scale ** jj, c / scale ** jj])
    holo = np.concatenate([[0j], (b - 1j * c) / scale ** jj])
    return HarmonicApprox(center=a, sigma=float(sigma), degree=degree, scale=scale, h_coeffs=h_coeffs,
                          a_sigma=float(np.max(np.abs(resid))), holo_completion=holo, cond=cond)
