"""Truncated Toeplitz operators with piecewise-constant symbols.

A symbol is an ordered list of ``(value, region)`` pieces over a default
value; the first piece containing ``z`` decides ``v(z)``. ``T_v`` is then a
linear combination of masked Gram matrices, so it inherits the exact ray
quadrature of :mod:`fockdom.sampling`.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigParseError, HypothesisUnsatisfied, InvalidLevel
from .regions import Complement, Empty, Full, Intersection, Region, Union, _build
from .sampling import FockTruncation, _area_check, sampling_constant

INVERTIBLE_TOL = 1e-10
STEP_TOL = 1e-6


def _fmt(x):
    return repr(float(x)) if float(x) != int(x) else str(int(x))


@dataclass(frozen=True)
class SymbolFunction:
    pieces: tuple = ()  # ((value, Region), ...), first match wins
    default: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        vals = [self.default] + [v for v, _ in self.pieces]
        if min(vals) < 0:
            raise ValueError("symbol values must be non-negative")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def expr(self) -> str:
        if not self.pieces:
            body = f"const({_fmt(self.default)})"
        elif len(self.pieces) == 1:
            top, E = self.pieces[0]
            body = f"mix({_fmt(self.default)}, {E.expr()}, top={_fmt(top)})"
        else:
            parts = ", ".join(f"{_fmt(v)}, {E.expr()}" for v, E in self.pieces)
            body = f"pieces({_fmt(self.default)}, {parts})"
        return body if self.scale == 1 else f"scaled({_fmt(self.scale)}, {body})"

    __str__ = expr

    def effective(self):
        """``(value, region)`` pairs with disjoint regions, the default last."""
        out, seen = [], []
        for v, E in self.pieces:
            eff = E if not seen else Intersection([E, Complement(Union(seen) if len(seen) > 1 else seen[0])])
            out.append((v, eff))
            seen.append(E)
        rest = Full() if not seen else Complement(Union(seen) if len(seen) > 1 else seen[0])
        out.append((self.default, rest))
        return out

    @property
    def v_max(self) -> float:
        return self.scale * max([self.default] + [v for v, _ in self.pieces])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.default, dtype=float)
        done = np.zeros(z.shape, dtype=bool)
        for v, E in self.pieces:
            hit = E.indicator(z).astype(bool) & ~done
            out[hit] = v
            done |= hit
        return self.scale * out

    def level_region(self, s: float) -> Region:
        """``E_s = {v >= s}``."""
        keep = [E for v, E in self.effective() if self.scale * v >= s]
        if not keep:
            return Empty()
        if any(isinstance(E, Full) for E in keep):
            return Full()
        # the effective pieces partition the plane
        if len(keep) == len(self.pieces) + 1:
            return Full()
        if len(keep) == 1:
            return keep[0]
        return Union(keep)

    def scaled(self, alpha: float) -> "SymbolFunction":
        return SymbolFunction(self.pieces, self.default, self.scale * alpha)


def const(c: float) -> SymbolFunction:
    return SymbolFunction((), float(c))


def mix(base: float, region: Region, top: float = 1.0) -> SymbolFunction:
    """``top`` on ``region``, ``base`` elsewhere."""
    return SymbolFunction(((float(top), region),), float(base))


def _sym_num(node, src):
    try:
        val = ast.literal_eval(node)
    except ValueError:
        raise ConfigParseError(f"expected a number in symbol {src!r}", field="symbol") from None
    if not isinstance(val, (int, float)):
        raise ConfigParseError(f"expected a number, got {val!r}", field="symbol")
    return float(val)


def _build_symbol(node, src):
    if not isinstance(node, ast.Call) or not isinstance(node.func, ast.Name):
        raise ConfigParseError(f"cannot parse symbol {src!r}", field="symbol")
    name, args = node.func.id, node.args
    kw = {k.arg: k.value for k in node.keywords}
    if name == "const" and len(args) == 1 and not kw:
        return const(_sym_num(args[0], src))
    if name == "mix" and len(args) in (2, 3):
        top = _sym_num(args[2], src) if len(args) == 3 else _sym_num(kw.pop("top"), src) if "top" in kw else 1.0
        if kw:
            raise ConfigParseError(f"mix(): unexpected keywords {sorted(kw)}", field="symbol")
        return mix(_sym_num(args[0], src), _build(args[1], src), top)
    if name == "scaled" and len(args) == 2 and not kw:
        return _build_symbol(args[1], src).scaled(_sym_num(args[0], src))
    if name == "pieces" and len(args) >= 3 and len(args) % 2 == 1 and not kw:
        pcs = tuple((_sym_num(args[i], src), _build(args[i + 1], src)) for i in range(1, len(args), 2))
        return SymbolFunction(pcs, _sym_num(args[0], src))
    raise ConfigParseError(f"cannot parse symbol {src!r}", field="symbol")


def parse_symbol(src: str) -> SymbolFunction:
    """``const(c)``, ``mix(base, region, top=1)``, ``pieces(default, v1, E1, ...)``, ``scaled(a, sym)``."""
    src = src.strip().strip('"').strip("'")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigParseError(f"bad symbol {src!r}: {exc.msg}", field="symbol") from None
    try:
        return _build_symbol(tree.body, src)
    except ValueError as exc:
        raise ConfigParseError(f"symbol {src!r}: {exc}", field="symbol") from None


# --------------------------------------------------------------------------


@dataclass
class ToeplitzTruncation:
    T: np.ndarray
    n_max: int
    symbol: str
    quadrature: dict
    unscaled: np.ndarray = field(repr=False, default=None)


def assemble_toeplitz(trunc: FockTruncation, v: SymbolFunction, check_area: bool = True,
                      seed: int = 0) -> ToeplitzTruncation:
    """``T_jk = int v e_j conj(e_k) e^{-2w} dA`` as a combination of masked Grams."""
    T0 = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for val, E in v.effective():
        if val == 0 or isinstance(E, Empty):
            continue
        if check_area:
            _area_check(trunc, E, seed)
        T0 += val * trunc.masked_gram(E)
    T0 = 0.5 * (T0 + T0.conj().T)
    return ToeplitzTruncation(T=v.scale * T0, n_max=trunc.n_max, symbol=v.expr(),
                              quadrature={"n_theta": trunc.n_theta, "r_cut": trunc.r_cut,
                                          "gl_order": trunc.gl_order},
                              unscaled=T0)


@dataclass
class InvertibilityReport:
    invertible: bool
    lambda_min: float
    lambda_max: float
    inv_norm: float
    bound: float
    slack: float
    C: float
    C_source: str
    s: float
    v_max: float
    step_lhs: float
    step_rhs: float
    step_holds: bool
    level_region: str

    @property
    def bound_holds(self) -> bool:
        return self.inv_norm <= self.bound * (1 + 1e-9)

    def as_record(self):
        return {k: getattr(self, k) for k in (
            "invertible", "lambda_min", "lambda_max", "inv_norm", "bound", "slack", "C", "C_source", "s",
            "v_max", "step_lhs", "step_rhs", "step_holds", "level_region")} | {"bound_holds": self.bound_holds}


def inverse_norm_bound(v_max: float, s: float, C: float) -> float:
    """``1/(v_max (1 - sqrt(1 - (s C / v_max)^2)))``; infinite when ``s C = 0``."""
    x = s / v_max * C
    if x > 1 + 1e-12:
        raise HypothesisUnsatisfied(f"(s/v_max)*C = {x:.6g} exceeds 1")
    x = min(x, 1.0)
    gap = 1.0 - math.sqrt(max(1.0 - x * x, 0.0))
    return math.inf if gap <= 0 else 1.0 / (v_max * gap)


def invertibility_check(T: ToeplitzTruncation, v: SymbolFunction, s: float, C="auto",
                        trunc: FockTruncation | None = None) -> InvertibilityReport:
    """Smallest eigenvalue of ``T_v`` against the lower bound built from the level set ``E_s``.

    With ``C="auto"`` the sampling constant of ``E_s`` at the same
    truncation is used (``trunc`` required).
    """
    vmax = v.v_max
    if not 0 < s <= vmax * (1 + 1e-12):
        raise InvalidLevel(f"level s={s} must lie in (0, {vmax}]")
    E = v.level_region(s)
    if isinstance(E, Empty):
        raise InvalidLevel(f"nothing of the symbol reaches level {s}")
    if trunc is not None and not isinstance(E, Full) and trunc.quadrature_area(E) <= 0:
        raise InvalidLevel(f"level set {E} has zero area inside the cutoff disk")
    if isinstance(C, str):
        if C != "auto":
            raise ValueError("C must be a number or 'auto'")
        if trunc is None:
            raise ValueError("C='auto' needs the truncation")
        C_val, src = sampling_constant(trunc, E).c_emp, "c_emp(E_s)"
    else:
        C_val, src = float(C), "supplied"
    ev = np.linalg.eigvalsh(T.T)
    lam_min, lam_max = float(ev[0]), float(ev[-1])
    invertible = lam_min > INVERTIBLE_TOL
    inv_norm = 1.0 / lam_min if invertible else math.inf
    bound = inverse_norm_bound(vmax, s, C_val)
    x = min(s / vmax * C_val, 1.0)
    step_rhs = math.sqrt(max(1.0 - x * x, 0.0))
    # I - T_{v/v_max}: its top eigenvalue is 1 - lam_min/v_max
    step_lhs = float(np.linalg.eigvalsh(np.eye(T.T.shape[0]) - T.T / vmax)[-1])
    return InvertibilityReport(
        invertible=invertible, lambda_min=lam_min, lambda_max=lam_max, inv_norm=inv_norm, bound=bound,
        slack=bound - inv_norm, C=C_val, C_source=src, s=float(s), v_max=vmax, step_lhs=step_lhs,
        step_rhs=step_rhs, step_holds=step_lhs <= step_rhs + STEP_TOL, level_region=E.expr())


def level_scan(trunc: FockTruncation, v: SymbolFunction, levels) -> list:
    """Invertibility against each level of a ladder (a falsification search, not a proof)."""
    T = assemble_toeplitz(trunc, v)
    out = []
    for s in levels:
        try:
            out.append(invertibility_check(T, v, s, "auto", trunc))
        except InvalidLevel:
            continue
    return out
