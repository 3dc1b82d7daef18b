"""Standard-form cone programs and a small builder for assembling them.

The canonical form is::

    minimize    c^T x
    subject to  A x + s = b,  s in K

where ``K`` is a product of tagged segments (see :mod:`.cones`).  The dual is
``maximize -b^T y`` subject to ``A^T y + c = 0``, ``y in K*``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..errors import ShapeError
from .cones import Cone, svec


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    MAX_ITER = "max_iter"


@dataclass
class ConicProblem:
    c: np.ndarray
    a: sp.csr_matrix
    b: np.ndarray
    cones: list[Cone]

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.a = sp.csr_matrix(self.a, dtype=float)
        m, n = self.a.shape
        if self.c.shape != (n,) or self.b.shape != (m,):
            raise ShapeError(f"A is {m}x{n} but |c|={self.c.size}, |b|={self.b.size}")
        total = sum(k.size for k in self.cones)
        if total != m:
            raise ShapeError(f"cone sizes sum to {total}, expected {m}")

    @property
    def num_vars(self) -> int:
        return self.a.shape[1]

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]

    def segments(self):
        """Yield ``(cone, slice)`` pairs in row order."""
        start = 0
        for k in self.cones:
            yield k, slice(start, start + k.size)
            start += k.size

    def count(self, kind: str) -> int:
        return sum(1 for k in self.cones if k.kind == kind)

    def to_dict(self) -> dict:
        coo = self.a.tocoo()
        return {
            "format": "min c'x s.t. Ax + s = b, s in K",
            "shape": list(self.a.shape),
            "c": self.c.tolist(),
            "b": self.b.tolist(),
            "A": {"row": coo.row.tolist(), "col": coo.col.tolist(), "val": coo.data.tolist()},
            "cones": [{"kind": k.kind, "dim": k.dim} for k in self.cones],
            "psd_packing": "column-major lower triangle, off-diagonals scaled by sqrt(2)",
            "exp_order": "(x, y, z): y exp(x / y) <= z",
        }

    def dump_json(self, path: str | Path) -> None:
        """Write a self-describing debug dump for cross-checking elsewhere."""
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def from_dict(cls, d: dict) -> "ConicProblem":
        a = sp.coo_matrix((d["A"]["val"], (d["A"]["row"], d["A"]["col"])), shape=tuple(d["shape"]))
        return cls(np.array(d["c"]), a.tocsr(), np.array(d["b"]),
                   [Cone(k["kind"], k["dim"]) for k in d["cones"]])


@dataclass
class ConicSolution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: Status
    primal_res: float
    dual_res: float
    gap: float
    iterations: int
    objective: float = float("nan")
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL


# -- builder -------------------------------------------------------------------

class ProblemBuilder:
    """Accumulates variables and cone constraints in sparse triplet form.

    Each ``add_*`` call takes a row block ``(coefs, rhs)`` describing the
    affine expression ``rhs - coefs @ x`` that must lie in the cone, i.e.
    the block's slack.  ``coefs`` is any (sparse or dense) matrix with
    ``num_vars`` columns at the time :meth:`build` is called.
    """

    def __init__(self):
        self.n = 0
        self.names: dict[str, slice] = {}
        self._blocks: list[tuple[str, object, np.ndarray, list[Cone]]] = []
        self.c = None

    def var(self, name: str, size: int) -> slice:
        if name in self.names:
            raise ValueError(f"variable {name!r} already defined")
        sl = slice(self.n, self.n + size)
        self.names[name] = sl
        self.n += size
        return sl

    def _add(self, kind, coefs, rhs, cones):
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        coefs = sp.csr_matrix(coefs)
        if coefs.shape[0] != rhs.size:
            raise ShapeError(f"{coefs.shape[0]} coefficient rows but {rhs.size} rhs entries")
        self._blocks.append((kind, coefs, rhs, cones))

    def add_eq(self, coefs, rhs):
        rhs = np.atleast_1d(rhs)
        self._add("zero", coefs, rhs, [Cone("zero", rhs.size)])

    def add_ge0(self, coefs, rhs):
        """``rhs - coefs x >= 0`` elementwise."""
        rhs = np.atleast_1d(rhs)
        self._add("nonneg", coefs, rhs, [Cone("nonneg", rhs.size)])

    def add_soc(self, coefs, rhs):
        rhs = np.atleast_1d(rhs)
        self._add("soc", coefs, rhs, [Cone("soc", rhs.size)])

    def add_psd(self, coefs, rhs, side: int):
        self._add("psd", coefs, rhs, [Cone("psd", side)])

    def add_exp(self, coefs, rhs):
        self._add("exp", coefs, rhs, [Cone("exp", 3)])

    def set_objective(self, c):
        self.c = np.asarray(c, dtype=float)

    def build(self) -> ConicProblem:
        """Assemble, ordering segments zero, nonneg, soc, psd, exp."""
        order = {"zero": 0, "nonneg": 1, "soc": 2, "psd": 3, "exp": 4}
        blocks = sorted(self._blocks, key=lambda blk: order[blk[0]])
        mats, rhs, cones = [], [], []
        for _, coefs, r, cs in blocks:
            if coefs.shape[1] < self.n:
                coefs = sp.hstack([coefs, sp.csr_matrix((coefs.shape[0], self.n - coefs.shape[1]))])
            mats.append(coefs)
            rhs.append(r)
            cones.extend(cs)
        # merge consecutive zero / nonneg segments
        merged: list[Cone] = []
        for k in cones:
            if merged and k.kind in ("zero", "nonneg") and merged[-1].kind == k.kind:
                merged[-1] = Cone(k.kind, merged[-1].dim + k.dim)
            else:
                merged.append(k)
        a = sp.vstack(mats).tocsr() if mats else sp.csr_matrix((0, self.n))
        b = np.concatenate(rhs) if rhs else np.zeros(0)
        c = np.zeros(self.n) if self.c is None else self.c
        return ConicProblem(c=c, a=a, b=b, cones=merged)


def selector(n_total: int, cols, coefs=None) -> sp.csr_matrix:
    """Row vector with ``coefs`` at ``cols``."""
    cols = np.atleast_1d(np.asarray(cols))
    vals = np.ones(cols.size) if coefs is None else np.atleast_1d(np.asarray(coefs, float))
    return sp.csr_matrix((vals, (np.zeros(cols.size, int), cols)), shape=(1, n_total))


# -- Hermitian variable blocks -------------------------------------------------

def herm_param_count(l: int) -> int:
    return l * l


@lru_cache(maxsize=None)
def _herm_index(l: int):
    iu = np.triu_indices(l, 1)
    return iu


def herm_coeffs(q: np.ndarray) -> np.ndarray:
    """Real coefficient vector(s) ``g`` with ``tr(Q W) = g @ theta(W)``.

    ``theta`` stacks ``diag(W)``, ``Re W[p, q]`` and ``Im W[p, q]`` for
    ``p < q``.  Works on stacks of Hermitian ``Q``.
    """
    q = np.asarray(q)
    l = q.shape[-1]
    iu = _herm_index(l)
    d = np.real(np.diagonal(q, axis1=-2, axis2=-1))
    up = q[..., iu[0], iu[1]]
    return np.concatenate([d, 2.0 * np.real(up), 2.0 * np.imag(up)], axis=-1)


def herm_params(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w)
    l = w.shape[-1]
    iu = _herm_index(l)
    up = w[..., iu[0], iu[1]]
    return np.concatenate([np.real(np.diagonal(w, axis1=-2, axis2=-1)),
                           np.real(up), np.imag(up)], axis=-1)


def herm_from_params(theta: np.ndarray, l: int) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    iu = _herm_index(l)
    k = len(iu[0])
    out = np.zeros(theta.shape[:-1] + (l, l), dtype=complex)
    idx = np.arange(l)
    out[..., idx, idx] = theta[..., :l]
    vals = theta[..., l:l + k] + 1j * theta[..., l + k:l + 2 * k]
    out[..., iu[0], iu[1]] = vals
    out[..., iu[1], iu[0]] = np.conj(vals)
    return out


def real_embedding(w: np.ndarray) -> np.ndarray:
    """``[[Re W, -Im W], [Im W, Re W]]``; PSD iff ``W`` is."""
    re, im = np.real(w), np.imag(w)
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


@lru_cache(maxsize=None)
def embedding_map(l: int) -> sp.csr_matrix:
    """Sparse ``T`` with ``svec(real_embedding(W)) = T @ theta(W)``."""
    n = herm_param_count(l)
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        cols.append(svec(real_embedding(herm_from_params(e, l))))
    return sp.csr_matrix(np.array(cols).T)
