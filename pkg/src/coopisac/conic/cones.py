"""Cone descriptors, scaled-triangle packing and Euclidean projections.

Segments of the slack vector ``s`` are tagged with one of five cones:

``zero``
    ``{0}`` (equality rows).
``nonneg``
    the nonnegative orthant.
``soc``
    ``{(t, x) : |x| <= t}``.
``psd``
    symmetric ``n x n`` PSD matrices packed by :func:`svec`.
``exp``
    ``cl{(x, y, z) : y > 0, y exp(x / y) <= z}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import math

import numpy as np

KINDS = ("zero", "nonneg", "soc", "psd", "exp")
SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class Cone:
    """A tagged segment.  ``dim`` is the segment length except for ``psd``,
    where it is the matrix side."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cone {self.kind!r}")
        if self.dim < 0 or (self.kind == "exp" and self.dim != 3):
            raise ValueError(f"bad dimension {self.dim} for {self.kind} cone")
        if self.kind == "soc" and self.dim < 1:
            raise ValueError("second-order cone needs dim >= 1")

    @property
    def size(self) -> int:
        if self.kind == "psd":
            return self.dim * (self.dim + 1) // 2
        return self.dim


# -- scaled lower-triangle packing -----------------------------------------

@lru_cache(maxsize=None)
def _tri(n: int):
    # column-major lower triangle: (0,0), (1,0), ..., (n-1,0), (1,1), ...
    rows, cols = [], []
    for j in range(n):
        for i in range(j, n):
            rows.append(i)
            cols.append(j)
    rows = np.array(rows)
    cols = np.array(cols)
    scale = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, scale


def side_from_size(size: int) -> int:
    n = int(round((np.sqrt(8 * size + 1) - 1) / 2))
    if n * (n + 1) // 2 != size:
        raise ValueError(f"{size} is not a triangular number")
    return n


def svec(m: np.ndarray) -> np.ndarray:
    """Pack symmetric matrices (trailing two axes) so that
    ``svec(A) @ svec(B) == trace(A B)``."""
    m = np.asarray(m, dtype=float)
    r, c, s = _tri(m.shape[-1])
    return m[..., r, c] * s


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`svec`."""
    v = np.asarray(v, dtype=float)
    n = side_from_size(v.shape[-1])
    r, c, s = _tri(n)
    out = np.zeros(v.shape[:-1] + (n, n))
    vals = v / s
    out[..., r, c] = vals
    out[..., c, r] = vals
    return out


# -- projections -------------------------------------------------------------

def proj_nonneg(v):
    return np.maximum(v, 0.0)


def proj_soc(v: np.ndarray) -> np.ndarray:
    """Second-order cone projection, batched over leading axes."""
    v = np.asarray(v, dtype=float)
    t = v[..., 0]
    x = v[..., 1:]
    nx = np.linalg.norm(x, axis=-1)
    out = np.zeros_like(v)
    inside = nx <= t
    out[inside] = v[inside]
    mid = (~inside) & (nx > -t)
    if np.any(mid):
        a = 0.5 * (t[mid] + nx[mid])
        out[mid, 0] = a
        out[mid, 1:] = (a / nx[mid])[:, None] * x[mid]
    # remaining rows (polar cone) stay zero
    return out


def proj_psd_svec(v: np.ndarray) -> np.ndarray:
    """PSD projection of packed matrices, batched over leading axes."""
    m = smat(v)
    w, q = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    return svec((q * w[..., None, :]) @ np.swapaxes(q, -1, -2))


def in_exp(v, tol: float = 0.0) -> np.ndarray:
    """Membership in the exponential cone, with absolute slack ``tol``
    scaled by the point's magnitude."""
    x, y, z = np.moveaxis(np.asarray(v, dtype=float), -1, 0)
    sc = tol * (1.0 + np.sqrt(x * x + y * y + z * z))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        interior = (y > 0) & (y * np.exp(x / y) <= z + sc)
    boundary = (y >= -sc) & (y <= sc) & (x <= sc) & (z >= -sc)
    return interior | boundary


def in_exp_dual(v, tol: float = 0.0) -> np.ndarray:
    """Membership in the dual cone ``{u < 0, -u exp(w / u) <= e z}`` plus its
    ``u = 0`` face."""
    u, w_, z = np.moveaxis(np.asarray(v, dtype=float), -1, 0)
    sc = tol * (1.0 + np.sqrt(u * u + w_ * w_ + z * z))
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        interior = (u < 0) & (-u * np.exp(w_ / u - 1.0) <= z + sc)
    boundary = (u >= -sc) & (u <= sc) & (w_ >= -sc) & (z >= -sc)
    return interior | boundary


def _friberg(v: np.ndarray, rho: np.ndarray):
    """Scaled root function whose zero gives the boundary parameter
    ``rho = x / y`` of the projection.  Multiplied by ``exp(-|rho|)`` to
    stay finite; the sign is unchanged."""
    r, s, t = v[:, 0], v[:, 1], v[:, 2]
    e = np.exp(-np.abs(rho))
    pos = rho >= 0
    # h(rho) = ((rho-1) r + s) e^rho - (r - rho s) e^-rho - (rho^2 - rho + 1) t
    a = (rho - 1.0) * r + s
    b = r - rho * s
    c = (rho * rho - rho + 1.0) * t
    return np.where(pos, a - b * e * e - c * e, a * e * e - b - c * e)


_RHO_GRID = np.sinh(np.linspace(-12.0, 12.0, 481))


def _friberg_newton(v, rho):
    """Scaled root function and its derivative (same scaling)."""
    r, s, t = v[:, 0], v[:, 1], v[:, 2]
    e = np.exp(-np.abs(rho))
    a = (rho - 1.0) * r + s
    b = r - rho * s
    c = (rho * rho - rho + 1.0) * t
    da = rho * r + s
    db = r - (rho - 1.0) * s
    dc = (2.0 * rho - 1.0) * t
    pos = rho >= 0
    # rho >= 0: H = h e^-rho, H' = (h' - h) e^-rho; rho < 0: H = h e^rho, H' = (h' + h) e^rho
    f = np.where(pos, a - b * e * e - c * e, a * e * e - b - c * e)
    hp = np.where(pos, da + db * e * e - dc * e, da * e * e + db - dc * e)
    df = np.where(pos, hp - f, hp + f)
    return f, df


def _exp_boundary_root(v: np.ndarray, iters: int = 60):
    """Boundary parameter ``rho`` for each row of ``v``.

    The scaled root function is not monotone on the whole line (it can also
    cross zero downwards, at a point with a negative ray coefficient), so a
    grid is scanned for the upward sign change, which is refined by Newton
    steps kept inside the bracket.  Rows without one get ``nan``.
    """
    g = _RHO_GRID[None, :]
    f = _friberg_grid(v, g)
    up = (f[:, :-1] < 0) & (f[:, 1:] >= 0)
    has = up.any(axis=1)
    idx = np.argmax(up, axis=1)
    lo = _RHO_GRID[idx].copy()
    hi = _RHO_GRID[np.minimum(idx + 1, len(_RHO_GRID) - 1)].copy()
    x = 0.5 * (lo + hi)
    for _ in range(iters):
        fx, dfx = _friberg_newton(v, x)
        neg = fx < 0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - fx / dfx
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        new = np.where(inside, step, 0.5 * (lo + hi))
        done = np.abs(new - x) <= 1e-13 * np.maximum(1.0, np.abs(x))
        x = new
        if np.all(done | ~has):
            break
    x[~has] = np.nan
    return x


def _friberg_grid(v, g):
    r, s, t = v[:, 0:1], v[:, 1:2], v[:, 2:3]
    e = np.exp(-np.abs(g))
    a = (g - 1.0) * r + s
    b = r - g * s
    c = (g * g - g + 1.0) * t
    return np.where(g >= 0, a - b * e * e - c * e, a * e * e - b - c * e)


def _proj_exp_dual_bisect(v, tol=1e-13):
    """Scalar fallback: bisection on the multiplier of the constraint
    ``x + y log(y / z) <= 0``, with a monotone inner solve for ``z``."""
    v0, v1, v2 = (float(a) for a in v)

    def point(rho):
        # z - v2 = tt solves tt (tt + v2) / rho^2 - v1 / rho + log(tt / rho) + 1 = 0
        def f(tt):
            return tt * (tt + v2) / rho**2 - v1 / rho + np.log(tt / rho) + 1.0
        lo = max(0.0, -v2)
        lo_eval = lo if lo > 0 else 1e-300
        if f(lo_eval * (1 + 1e-15) + 1e-300) >= 0:
            tt = lo_eval
        else:
            hi = max(2.0 * lo, 1.0)
            while f(hi) < 0:
                hi *= 2.0
            a, b = lo_eval, hi
            for _ in range(200):
                m = 0.5 * (a + b)
                if f(m) < 0:
                    a = m
                else:
                    b = m
                if b - a <= 1e-16 * b:
                    break
            tt = 0.5 * (a + b)
        z = tt + v2
        y = tt * z / rho
        return np.array([v0 - rho, y, z])

    def grad(p):
        x, y, z = p
        if y <= 1e-300 or z <= 1e-300:
            return x
        return x + y * np.log(y / z)

    lo, hi = 0.0, 0.125
    while grad(point(hi)) > 0:
        lo, hi = hi, 2.0 * hi
    for _ in range(300):
        m = 0.5 * (lo + hi)
        if grad(point(m)) > 0:
            lo = m
        else:
            hi = m
        if hi - lo <= tol * max(1.0, hi):
            break
    return point(0.5 * (lo + hi))


def _root_scalar(r, s, t, lo, hi, iters=60):
    """Safeguarded Newton on one bracket (plain floats)."""
    x = 0.5 * (lo + hi)
    for _ in range(iters):
        e = math.exp(-abs(x))
        a = (x - 1.0) * r + s
        b = r - x * s
        c = (x * x - x + 1.0) * t
        da = x * r + s
        db = r - (x - 1.0) * s
        dc = (2.0 * x - 1.0) * t
        if x >= 0:
            f = a - b * e * e - c * e
            df = da + db * e * e - dc * e - f
        else:
            f = a * e * e - b - c * e
            df = da * e * e + db - dc * e + f
        if f < 0:
            lo = x
        else:
            hi = x
        step = x - f / df if df != 0 else math.nan
        new = step if (lo < step < hi) else 0.5 * (lo + hi)
        if abs(new - x) <= 1e-13 * max(1.0, abs(x)):
            return new
        x = new
    return x


def _proj_exp_one(p: np.ndarray) -> np.ndarray:
    """Single-point version of :func:`proj_exp` with scalar arithmetic;
    much cheaper than the batched path for a handful of cones."""
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    nv = math.sqrt(x * x + y * y + z * z)
    if y > 0 and x / y < 700 and y * math.exp(x / y) <= z:
        return p.copy()
    if y == 0 and x <= 0 and z >= 0:
        return p.copy()
    u, w_, zz = -x, -y, -z  # polar test: -v in the dual cone
    if (u < 0 and w_ / u - 1.0 < 700 and -u * math.exp(w_ / u - 1.0) <= zz) or (u == 0 and w_ >= 0 and zz >= 0):
        return np.zeros(3)
    if x < 0 and y < 0:
        return np.array([x, 0.0, max(z, 0.0)])
    f = _friberg_grid(p[None, :], _RHO_GRID[None, :])[0]
    up = np.flatnonzero((f[:-1] < 0) & (f[1:] >= 0))
    if up.size:
        i = int(up[0])
        rho = _root_scalar(x, y, z, float(_RHO_GRID[i]), float(_RHO_GRID[i + 1]))
        if rho < 700:
            er = math.exp(rho)
            coef = max(rho * x + y + er * z, 0.0) / (rho * rho + 1.0 + er * er)
            cand = np.array([coef * rho, coef, coef * er])
            res = cand - p
            if (in_exp_dual(res, 1e-9)
                    and abs(float(cand @ res)) <= 1e-9 * (1.0 + nv) ** 2):
                return cand
    return _proj_exp_dual_bisect(p)


def proj_exp(v: np.ndarray) -> np.ndarray:
    """Projection onto the exponential cone, batched over rows of ``(n, 3)``.

    Trivial cases (inside the cone, inside the polar cone, x < 0 and y < 0)
    are closed form.  The rest lie on a boundary ray ``y (rho, 1, e^rho)``
    whose parameter is a root of a scalar function.  Each boundary result is
    checked through Moreau's decomposition and recomputed by a slower scalar
    dual bisection if the check fails.
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[0] <= 8:
        return np.array([_proj_exp_one(p) for p in v]).reshape(v.shape)
    out = np.empty_like(v)
    prim = in_exp(v)
    polar = in_exp_dual(-v) & ~prim
    neg = (v[:, 0] < 0) & (v[:, 1] < 0) & ~prim & ~polar
    out[prim] = v[prim]
    out[polar] = 0.0
    out[neg] = np.stack([v[neg, 0], np.zeros(neg.sum()), np.maximum(v[neg, 2], 0.0)], axis=1)
    rest = ~(prim | polar | neg)
    if rest.any():
        vr = v[rest]
        rho = _exp_boundary_root(vr)
        with np.errstate(over="ignore", invalid="ignore"):
            d = np.stack([rho, np.ones_like(rho), np.exp(rho)], axis=1)
            coef = np.maximum(np.sum(vr * d, axis=1), 0.0) / np.sum(d * d, axis=1)
            cand = coef[:, None] * d
            res = cand - vr
            scale = 1.0 + np.linalg.norm(vr, axis=1)
            ok = (np.isfinite(cand).all(axis=1)
                  & in_exp_dual(res, 1e-9)
                  & (np.abs(np.sum(cand * res, axis=1)) <= 1e-9 * scale**2))
        for i in np.flatnonzero(~ok):
            cand[i] = _proj_exp_dual_bisect(vr[i])
        out[rest] = cand
    return out


def proj_exp_dual(v: np.ndarray) -> np.ndarray:
    """Projection onto the dual exponential cone via Moreau's identity."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    return v + proj_exp(-v)


def project_cone(segment, cone: Cone, dual: bool = False) -> np.ndarray:
    """Project one segment onto ``cone`` (or its dual cone)."""
    segment = np.asarray(segment, dtype=float)
    if segment.shape[-1] != cone.size:
        raise ValueError(f"segment length {segment.shape[-1]} != cone size {cone.size}")
    k = cone.kind
    if k == "zero":
        return segment.copy() if dual else np.zeros_like(segment)
    if k == "nonneg":
        return proj_nonneg(segment)
    if k == "soc":
        return proj_soc(segment)
    if k == "psd":
        return proj_psd_svec(segment)
    if dual:
        return proj_exp_dual(segment.reshape(-1, 3)).reshape(segment.shape)
    return proj_exp(segment.reshape(-1, 3)).reshape(segment.shape)
