"""Run configuration: an INI file with one section per module, plus CLI overrides.

Example::

    [run]
    weight = abs2
    seed = 0

    [covering]
    delta = 0.25
    domain = -10,-10,10,10

Unknown sections or keys are rejected with their line number.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

from .errors import ConfigParseError


def _fmt(x) -> str:
    x = float(x)
    if math.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _floats(text, n=None):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    vals = tuple(float(p) for p in parts)
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    if not vals:
        raise ValueError("expected at least one number")
    return vals


def _ints(text):
    text = text.strip()
    m = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", text)
    if m:
        a, b = int(m.group(1)), int(m.group(2))
        if b < a:
            raise ValueError("empty range")
        return tuple(range(a, b + 1))
    vals = tuple(int(p) for p in re.split(r"[,\s]+", text) if p)
    if not vals:
        raise ValueError("expected at least one integer")
    return vals


def _fmt_ints(vals):
    vals = tuple(vals)
    if len(vals) > 2 and vals == tuple(range(vals[0], vals[-1] + 1)):
        return f"{vals[0]}..{vals[-1]}"
    return ",".join(str(v) for v in vals)


def _points(text):
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            x, y = _floats(chunk, 2)
            out.append(complex(x, y))
    if not out:
        raise ValueError("expected at least one point x,y")
    return tuple(out)


def _fmt_points(pts):
    return ";".join(f"{_fmt(p.real)},{_fmt(p.imag)}" for p in pts)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


KINDS = {
    "str": (lambda t: t.strip(), str),
    "int": (lambda t: int(t.strip()), str),
    "float": (lambda t: float(t.strip()), _fmt),
    "bool": (_bool, lambda b: "true" if b else "false"),
    "floats": (_floats, lambda v: ",".join(_fmt(x) for x in v)),
    "floats3": (lambda t: _floats(t, 3), lambda v: ",".join(_fmt(x) for x in v)),
    "floats4": (lambda t: _floats(t, 4), lambda v: ",".join(_fmt(x) for x in v)),
    "ints": (_ints, _fmt_ints),
    "points": (_points, _fmt_points),
}

# (section, key, kind, default, help)
FIELDS = [
    ("run", "weight", "str", "abs2", "weight name, e.g. abs2 or abs_pow:alpha=3"),
    ("run", "seed", "int", 0, "master seed"),
    ("run", "out", "str", "", "output directory (default $FOCKDOM_OUT/<subcommand>)"),
    ("run", "tol", "float", 1e-10, "quadrature / root tolerance"),
    ("run", "z", "points", (0j,), "probe points x,y;x,y"),
    ("region", "region", "str", "full", "region expression"),
    ("covering", "delta", "float", 0.25, "separation parameter"),
    ("covering", "domain", "floats4", (-10.0, -10.0, 10.0, 10.0), "x0,y0,x1,y1"),
    ("covering", "s_ladder", "floats", (1.0, 2.0, 4.0, 8.0), "overlap multipliers"),
    ("covering", "epsilon", "float", 0.1, "epsilon in the overlap exponent"),
    ("covering", "m", "float", 4.0, "summability exponent"),
    ("covering", "r_ladder", "floats", (1.0, 2.0, 4.0, 8.0, 16.0), "exclusion radii"),
    ("covering", "sigma_ladder", "floats", (1.0, 2.0, 4.0), "harmonic-fit multipliers"),
    ("covering", "degree", "int", 6, "harmonic polynomial degree"),
    ("covering", "probe_n", "int", 200, "probe grid points per side"),
    ("covering", "radii", "floats", (1.5, 2.0, 4.0, 8.0), "growth-law multipliers"),
    ("sampling", "nmax", "int", 20, "truncation degree"),
    ("sampling", "p", "float", 2.0, "exponent p"),
    ("sampling", "r", "float", 2.0, "density radius multiplier"),
    ("sampling", "lambdas", "floats3", (1.0, 1.0, 1.0), "sampling-bound constants lambda, lambda', lambda''"),
    ("sampling", "c", "float", math.e, "sampling-bound base constant c"),
    ("sampling", "samples_per_disk", "int", 4096, "density samples per probe"),
    ("sampling", "dots", "floats", (0.1, 0.15, 0.2, 0.25, 0.3, 0.35), "polka dot radius / pitch ladder"),
    ("sampling", "pitch", "float", 1.0, "polka pitch in units of rho(0)"),
    ("sampling", "s", "float", 1.0, "good-disk multiplier (t = 4s)"),
    ("sampling", "c_frac", "float", 0.5, "good-disk captured fraction"),
    ("sampling", "functions", "int", 20, "number of random test functions"),
    ("remez", "degree_ladder", "ints", tuple(range(9)), "degrees, e.g. 0..8"),
    ("remez", "s_fracs", "floats", (0.1, 0.25, 0.5, 0.9), "sublevel fractions of |G|"),
    ("remez", "trials", "int", 10_000, "trials per cell"),
    ("remez", "mc_points", "int", 100_000, "Monte Carlo points for the sublevel measure"),
    ("toeplitz", "symbol", "str", "const(1)", "symbol expression"),
    ("toeplitz", "level", "float", 1.0, "level s"),
    ("toeplitz", "C", "str", "auto", "sampling constant: auto or a number"),
]

_BY_KEY = {f[1]: f for f in FIELDS}
SECTIONS = tuple(dict.fromkeys(f[0] for f in FIELDS))


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {f[1]: f[3] for f in FIELDS})

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def set(self, key: str, raw, line: int | None = None):
        """Set ``key`` from its string form (or an already typed value)."""
        if key not in _BY_KEY:
            raise ConfigParseError(f"unknown key {key!r}", field=key, line=line)
        kind = _BY_KEY[key][2]
        if isinstance(raw, str):
            try:
                val = KINDS[kind][0](raw)
            except (ValueError, TypeError) as exc:
                raise ConfigParseError(f"bad value {raw!r}: {exc}", field=key, line=line) from None
        else:
            val = raw
        self.values[key] = val

    def to_ini(self) -> str:
        lines = []
        for sec in SECTIONS:
            lines.append(f"[{sec}]")
            for s, key, kind, _, _ in FIELDS:
                if s == sec:
                    lines.append(f"{key} = {KINDS[kind][1](self.values[key])}")
            lines.append("")
        return "\n".join(lines)


def _line_of(text: str, section: str, key: str):
    cur = None
    for i, ln in enumerate(text.splitlines(), 1):
        s = ln.strip()
        if s.startswith("[") and s.endswith("]"):
            cur = s[1:-1].strip()
            if cur == section and not key:
                return i
        elif cur == section and re.match(rf"{re.escape(key)}\s*[=:]", s, flags=re.IGNORECASE):
            return i
    return None


def parse_config(text: str) -> RunConfig:
    """Parse INI text into a :class:`RunConfig` (missing keys keep their defaults)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";;"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigParseError(f"malformed config: {exc.message if hasattr(exc, 'message') else exc}",
                               line=line) from None
    cfg = RunConfig()
    for sec in cp.sections():
        if sec not in SECTIONS:
            raise ConfigParseError(f"unknown section [{sec}]", line=_line_of(text, sec, ""))
        for key, raw in cp.items(sec):
            line = _line_of(text, sec, key)
            if key not in _BY_KEY or _BY_KEY[key][0] != sec:
                raise ConfigParseError(f"unknown key {key!r} in [{sec}]", field=key, line=line)
            raw = raw.strip()
            if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "\"'":
                raw = raw[1:-1]
            cfg.set(key, raw, line)
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
