"""Hot inner loops.

Each kernel exists twice: a loop version compiled with numba and a
numpy/scipy version. The public functions dispatch on
``fockdom._accel.USE_NUMBA``; the ``*_numba`` / ``*_numpy`` variants are
importable directly so the benchmark can time both in one process.
"""
import math

import numpy as np

from . import _accel

_compiled = {}


def _compile(fn):
    # jitted helpers called from fn must be dispatchers, not python wrappers
    for name in fn.__code__.co_names:
        dep = fn.__globals__.get(name)
        if getattr(dep, "py_func", None) is not None and not hasattr(dep, "overloads"):
            fn.__globals__[name] = _compiled.get(name) or _compile(dep.py_func)
    cfn = _accel.numba.njit(cache=True)(fn)
    _compiled[fn.__name__] = cfn
    return cfn


def _jit(fn):
    """Compile ``fn`` on first use (numba import is deferred until needed)."""

    def wrapper(*args):
        cfn = _compiled.get(fn.__name__)
        if cfn is None:
            cfn = _compile(fn)
        return cfn(*args)

    wrapper.__name__ = fn.__name__
    wrapper.py_func = fn
    return wrapper


# --------------------------------------------------------------------------
# cell index


def build_cells(x, y, x0, y0, cell, nx, ny):
    """CSR bucket index of points on a regular ``nx`` x ``ny`` cell grid.

    Returns ``(start, order)``: points of cell ``c = iy*nx + ix`` are
    ``order[start[c]:start[c+1]]``. Points outside the grid are clamped.
    """
    ix = np.clip(np.floor((x - x0) / cell).astype(np.int64), 0, nx - 1)
    iy = np.clip(np.floor((y - y0) / cell).astype(np.int64), 0, ny - 1)
    key = iy * nx + ix
    order = np.argsort(key, kind="stable").astype(np.int64)
    counts = np.bincount(key, minlength=nx * ny)
    start = np.zeros(nx * ny + 1, dtype=np.int64)
    np.cumsum(counts, out=start[1:])
    return start, order


# --------------------------------------------------------------------------
# greedy separated net


@_jit
def _greedy_net_loop(cx, cy, crho, delta, x0, y0, cell, nx, ny):
    n = cx.shape[0]
    head = -np.ones(nx * ny, dtype=np.int64)
    nxt = -np.ones(n, dtype=np.int64)
    accepted = np.zeros(n, dtype=np.int64)
    n_acc = 0
    for i in range(n):
        ix = int(math.floor((cx[i] - x0) / cell))
        iy = int(math.floor((cy[i] - y0) / cell))
        ix = min(max(ix, 0), nx - 1)
        iy = min(max(iy, 0), ny - 1)
        ok = True
        for jy in range(max(iy - 1, 0), min(iy + 2, ny)):
            if not ok:
                break
            for jx in range(max(ix - 1, 0), min(ix + 2, nx)):
                j = head[jy * nx + jx]
                while j >= 0:
                    need = delta * max(crho[i], crho[j])
                    dx = cx[i] - cx[j]
                    dy = cy[i] - cy[j]
                    if dx * dx + dy * dy < need * need:
                        ok = False
                        break
                    j = nxt[j]
                if not ok:
                    break
        if ok:
            c = iy * nx + ix
            nxt[i] = head[c]
            head[c] = i
            accepted[n_acc] = i
            n_acc += 1
    return accepted[:n_acc]


def greedy_net_numba(cx, cy, crho, delta, x0, y0, cell, nx, ny):
    return _greedy_net_loop(cx, cy, crho, float(delta), float(x0), float(y0),
                            float(cell), int(nx), int(ny))


def greedy_net_numpy(cx, cy, crho, delta, x0, y0, cell, nx, ny):
    buckets = {}
    accepted = []
    ix_all = np.clip(np.floor((cx - x0) / cell).astype(np.int64), 0, nx - 1)
    iy_all = np.clip(np.floor((cy - y0) / cell).astype(np.int64), 0, ny - 1)
    pts = cx + 1j * cy
    for i in range(cx.shape[0]):
        ix, iy = ix_all[i], iy_all[i]
        near = []
        for jy in (iy - 1, iy, iy + 1):
            for jx in (ix - 1, ix, ix + 1):
                near.extend(buckets.get((jx, jy), ()))
        if near:
            near = np.asarray(near)
            need = delta * np.maximum(crho[i], crho[near])
            if np.any(np.abs(pts[near] - pts[i]) < need):
                continue
        buckets.setdefault((ix, iy), []).append(i)
        accepted.append(i)
    return np.asarray(accepted, dtype=np.int64)


def greedy_net(cx, cy, crho, delta, x0, y0, cell, nx, ny):
    """Indices of a maximal separated subset, scanned in the given order.

    Candidate ``i`` is kept when ``|c_i - a_j| >= delta*max(rho_i, rho_j)``
    for every kept ``a_j``. ``cell`` must be at least ``delta*max(crho)``.
    """
    fn = greedy_net_numba if _accel.USE_NUMBA else greedy_net_numpy
    return fn(np.ascontiguousarray(cx, dtype=float), np.ascontiguousarray(cy, dtype=float),
              np.ascontiguousarray(crho, dtype=float), delta, x0, y0, cell, nx, ny)


# --------------------------------------------------------------------------
# disk stamping on a regular grid


@_jit
def _stamp_loop(values, gx0, gdx, gnx, gy0, gdy, gny, ax, ay, radii, counts, sums):
    # counts[ny, nx] += 1 for points inside each disk; sums[k] = sum of values inside disk k
    use_vals = values.shape[0] > 0
    for k in range(ax.shape[0]):
        r = radii[k]
        r2 = r * r
        i0 = max(int(math.ceil((ax[k] - r - gx0) / gdx)), 0)
        i1 = min(int(math.floor((ax[k] + r - gx0) / gdx)), gnx - 1)
        j0 = max(int(math.ceil((ay[k] - r - gy0) / gdy)), 0)
        j1 = min(int(math.floor((ay[k] + r - gy0) / gdy)), gny - 1)
        acc = 0.0
        for j in range(j0, j1 + 1):
            dy = gy0 + j * gdy - ay[k]
            dy2 = dy * dy
            for i in range(i0, i1 + 1):
                dx = gx0 + i * gdx - ax[k]
                if dx * dx + dy2 < r2:
                    counts[j, i] += 1
                    if use_vals:
                        acc += values[j, i]
        sums[k] = acc


def _grid_axes(grid):
    x0, x1, nx, y0, y1, ny = grid
    dx = (x1 - x0) / (nx - 1) if nx > 1 else 1.0
    dy = (y1 - y0) / (ny - 1) if ny > 1 else 1.0
    return float(x0), float(dx), int(nx), float(y0), float(dy), int(ny)


def stamp_numba(grid, ax, ay, radii, values=None):
    gx0, gdx, gnx, gy0, gdy, gny = _grid_axes(grid)
    counts = np.zeros((gny, gnx), dtype=np.int64)
    sums = np.zeros(len(ax))
    vals = np.zeros((0, 0)) if values is None else np.ascontiguousarray(values, dtype=float)
    _stamp_loop(vals, gx0, gdx, gnx, gy0, gdy, gny,
                np.ascontiguousarray(ax, dtype=float), np.ascontiguousarray(ay, dtype=float),
                np.ascontiguousarray(radii, dtype=float), counts, sums)
    return counts, sums


def stamp_numpy(grid, ax, ay, radii, values=None):
    gx0, gdx, gnx, gy0, gdy, gny = _grid_axes(grid)
    xs = gx0 + gdx * np.arange(gnx)
    ys = gy0 + gdy * np.arange(gny)
    counts = np.zeros((gny, gnx), dtype=np.int64)
    sums = np.zeros(len(ax))
    for k in range(len(ax)):
        r = radii[k]
        i0 = max(int(math.ceil((ax[k] - r - gx0) / gdx)), 0)
        i1 = min(int(math.floor((ax[k] + r - gx0) / gdx)), gnx - 1)
        j0 = max(int(math.ceil((ay[k] - r - gy0) / gdy)), 0)
        j1 = min(int(math.floor((ay[k] + r - gy0) / gdy)), gny - 1)
        if i1 < i0 or j1 < j0:
            continue
        dx = xs[i0:i1 + 1] - ax[k]
        dy = ys[j0:j1 + 1] - ay[k]
        inside = dy[:, None] ** 2 + dx[None, :] ** 2 < r * r
        counts[j0:j1 + 1, i0:i1 + 1] += inside
        if values is not None:
            sums[k] = values[j0:j1 + 1, i0:i1 + 1][inside].sum()
    return counts, sums


def stamp(grid, ax, ay, radii, values=None):
    """Stamp open disks onto a regular grid.

    ``grid`` is ``(x0, x1, nx, y0, y1, ny)`` with inclusive end points.
    Returns the per-point membership count (shape ``(ny, nx)``) and, when
    ``values`` is given, the per-disk sum of ``values`` over grid points
    inside each disk.
    """
    fn = stamp_numba if _accel.USE_NUMBA else stamp_numpy
    return fn(grid, ax, ay, radii, values)


# --------------------------------------------------------------------------
# min_k |z - a_k| / rho_k


@_jit
def _min_scaled_loop(px, py, ax, ay, arho, start, order, x0, y0, cell, nx, ny, rho_max):
    out = np.empty(px.shape[0])
    for p in range(px.shape[0]):
        ix = min(max(int(math.floor((px[p] - x0) / cell)), 0), nx - 1)
        iy = min(max(int(math.floor((py[p] - y0) / cell)), 0), ny - 1)
        best = np.inf
        ring = 0
        while True:
            for jy in range(iy - ring, iy + ring + 1):
                if jy < 0 or jy >= ny:
                    continue
                edge_row = jy == iy - ring or jy == iy + ring
                step = 1 if edge_row else 2 * ring
                jx = ix - ring
                while jx <= ix + ring:
                    if 0 <= jx < nx:
                        c = jy * nx + jx
                        for t in range(start[c], start[c + 1]):
                            k = order[t]
                            dx = px[p] - ax[k]
                            dy = py[p] - ay[k]
                            v = math.sqrt(dx * dx + dy * dy) / arho[k]
                            if v < best:
                                best = v
                    if step == 0:
                        break
                    jx += step
            # every unvisited centre is at least ring*cell away
            if best <= ring * cell / rho_max:
                break
            if ring > nx + ny:
                break
            ring += 1
        out[p] = best
    return out


def min_scaled_distance_numba(px, py, ax, ay, arho):
    x0, x1 = min(ax.min(), px.min()), max(ax.max(), px.max())
    y0, y1 = min(ay.min(), py.min()), max(ay.max(), py.max())
    cell = max(2.0 * np.median(arho), 1e-12)
    nx = max(int((x1 - x0) / cell) + 1, 1)
    ny = max(int((y1 - y0) / cell) + 1, 1)
    start, order = build_cells(ax, ay, x0, y0, cell, nx, ny)
    return _min_scaled_loop(np.ascontiguousarray(px, dtype=float), np.ascontiguousarray(py, dtype=float),
                            np.ascontiguousarray(ax, dtype=float), np.ascontiguousarray(ay, dtype=float),
                            np.ascontiguousarray(arho, dtype=float), start, order,
                            float(x0), float(y0), float(cell), nx, ny, float(arho.max()))


def min_scaled_distance_numpy(px, py, ax, ay, arho):
    from scipy.spatial import cKDTree

    tree = cKDTree(np.column_stack([ax, ay]))
    q = np.column_stack([px, py])
    d1, i1 = tree.query(q)
    best = d1 / arho[i1]
    # any better centre must lie within best*rho_max
    reach = best * arho.max()
    out = best.copy()
    for p, idx in enumerate(tree.query_ball_point(q, reach * (1 + 1e-12))):
        if len(idx) > 1:
            idx = np.asarray(idx)
            out[p] = min(out[p], np.min(np.hypot(px[p] - ax[idx], py[p] - ay[idx]) / arho[idx]))
    return out


def min_scaled_distance(px, py, ax, ay, arho):
    """For each probe, ``min_k |p - a_k| / rho_k`` (the smallest covering multiplier)."""
    px, py, ax, ay, arho = (np.asarray(v, dtype=float) for v in (px, py, ax, ay, arho))
    fn = min_scaled_distance_numba if _accel.USE_NUMBA else min_scaled_distance_numpy
    return fn(px, py, ax, ay, arho)


# --------------------------------------------------------------------------
# Remez ratios


@_jit
def _quickselect(a, m, k):
    # in-place k-th smallest of a[:m] (Hoare partition, median-of-three pivot)
    lo, hi = 0, m - 1
    while hi > lo:
        mid = (lo + hi) // 2
        if a[mid] < a[lo]:
            a[mid], a[lo] = a[lo], a[mid]
        if a[hi] < a[lo]:
            a[hi], a[lo] = a[lo], a[hi]
        if a[hi] < a[mid]:
            a[hi], a[mid] = a[mid], a[hi]
        pivot = a[mid]
        i, j = lo, hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                a[i], a[j] = a[j], a[i]
                i += 1
                j -= 1
        if k <= j:
            hi = j
        elif k >= i:
            lo = i
        else:
            return a[k]
    return a[k]


@_jit
def _select_many(x, ks, out, bufs, fallback):
    # exact order statistics: bracket each target with quantiles of one
    # sorted strided sample, collect each band in one pass, then select
    n = x.shape[0]
    nk = ks.shape[0]
    step = max(n // 2048, 1)
    samp = np.sort(x[::step])
    ns = samp.shape[0]
    margin = 2.0 * math.sqrt(ns) + 8.0
    los = np.empty(nk)
    his = np.empty(nk)
    for j in range(nk):
        pos = ks[j] * ns / n
        i_lo = int(pos - margin)
        i_hi = int(pos + margin) + 1
        los[j] = samp[i_lo] if i_lo > 0 else -np.inf
        his[j] = samp[i_hi] if i_hi < ns else np.inf
    for j in range(nk):
        lo = los[j]
        hi = his[j]
        buf = bufs[j]
        below = 0
        cnt = 0
        # branch-free compaction: always write, advance only on a hit
        for i in range(n):
            v = x[i]
            below += v < lo
            buf[cnt] = v
            cnt += (v >= lo) & (v <= hi)
        kk = ks[j] - below
        if 0 <= kk < cnt:
            out[j] = _quickselect(buf, cnt, kk)
        else:
            fallback[:n] = x
            out[j] = _quickselect(fallback, n, ks[j])


@_jit
def _remez_loop(coeffs, pts, bpts, ks):
    n_trials = coeffs.shape[0]
    deg = coeffs.shape[1] - 1
    m = pts.shape[0]
    nk = ks.shape[0]
    out = np.empty((n_trials, nk))
    mod2 = np.empty(m)
    bufs = np.empty((nk, m + 1))
    fallback = np.empty(m)
    q2 = np.empty(nk)
    for t in range(n_trials):
        for i in range(m):
            acc = coeffs[t, deg]
            z = pts[i]
            for j in range(deg - 1, -1, -1):
                acc = acc * z + coeffs[t, j]
            mod2[i] = acc.real * acc.real + acc.imag * acc.imag
        sup2 = 0.0
        for i in range(bpts.shape[0]):
            acc = coeffs[t, deg]
            z = bpts[i]
            for j in range(deg - 1, -1, -1):
                acc = acc * z + coeffs[t, j]
            a = acc.real * acc.real + acc.imag * acc.imag
            if a > sup2:
                sup2 = a
        _select_many(mod2, ks, q2, bufs, fallback)
        for s in range(nk):
            out[t, s] = math.sqrt(sup2 / q2[s]) if q2[s] > 0 else np.inf
    return out


def remez_ratios_numba(coeffs, pts, bpts, ks):
    return _remez_loop(np.ascontiguousarray(coeffs, dtype=np.complex128),
                       np.ascontiguousarray(pts, dtype=np.complex128),
                       np.ascontiguousarray(bpts, dtype=np.complex128),
                       np.ascontiguousarray(ks, dtype=np.int64))


def remez_ratios_numpy(coeffs, pts, bpts, ks, batch=16):
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    out = np.empty((coeffs.shape[0], len(ks)))
    for b0 in range(0, coeffs.shape[0], batch):
        c = coeffs[b0:b0 + batch]
        v = np.polynomial.polynomial.polyval(pts, c.T)
        mod2 = v.real ** 2 + v.imag ** 2
        vb = np.polynomial.polynomial.polyval(bpts, c.T)
        sup2 = (vb.real ** 2 + vb.imag ** 2).max(axis=1)
        q2 = np.partition(mod2, np.asarray(ks), axis=1)[:, ks]
        with np.errstate(divide="ignore"):
            out[b0:b0 + batch] = np.sqrt(sup2[:, None] / q2)
    return out


def remez_ratios(coeffs, pts, bpts, ks):
    """``sup_boundary |p| / q_k(|p|)`` for each coefficient row and order index.

    ``q_k`` is the k-th smallest (0-based) modulus over ``pts``. Rows are
    coefficients in ascending powers.
    """
    ks = np.asarray(ks, dtype=np.int64)
    if np.any(ks < 0) or np.any(ks >= len(pts)):
        raise ValueError("order index out of range")
    fn = remez_ratios_numba if _accel.USE_NUMBA else remez_ratios_numpy
    return fn(coeffs, pts, bpts, ks)
