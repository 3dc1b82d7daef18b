"""Dense complex-Hermitian kernels: eigendecomposition, inverse square root,
PSD projection and dominant rank-one extraction.

Two eigensolvers are available.  ``method="lapack"`` (default) calls
``numpy.linalg.eigh``; ``method="jacobi"`` is a cyclic complex Jacobi sweep
kept as an independent route for cross-checking.
"""
from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, SingularError

ASYMMETRY_WARN = 1e-8


class EigenDecomposition(NamedTuple):
    values: np.ndarray  # real, descending
    vectors: np.ndarray  # orthonormal columns


def hermitian(m, warn: bool = True) -> np.ndarray:
    """Return ``(M + M^H) / 2``, warning when M is visibly non-Hermitian."""
    m = np.asarray(m)
    if not np.iscomplexobj(m):
        m = m.astype(complex)
    mh = np.conj(np.swapaxes(m, -1, -2))
    if warn:
        scale = max(np.max(np.abs(m), initial=0.0), 1e-300)
        if np.max(np.abs(m - mh), initial=0.0) > ASYMMETRY_WARN * scale:
            warnings.warn("matrix is not Hermitian; symmetrizing", RuntimeWarning, stacklevel=2)
    return 0.5 * (m + mh)


def _jacobi(a: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100):
    """Cyclic Jacobi for a single Hermitian matrix.

    Each rotation zeroes a complex off-diagonal pair (p, q) with the unitary
    ``[[c, -s e^{i phi}], [s e^{-i phi}, c]]`` acting on columns p and q.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.real(np.diag(a)).copy(), v
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[offdiag])
        if off <= tol * scale:
            return np.real(np.diag(a)).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= 1e-300:
                    continue
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * mag, aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                # columns: a <- a J
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * np.conj(phase) * aq
                a[:, q] = s * phase * ap + c * aq
                # rows: a <- J^H a
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * phase * aq
                a[q, :] = s * np.conj(phase) * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * np.conj(phase) * vq
                v[:, q] = s * phase * vp + c * vq
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")


def herm_eig(m, method: str = "lapack") -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix, values descending.

    Raises
    ------
    ConvergenceError
        The Jacobi sweep limit was hit (``method="jacobi"`` only).
    ValueError
        Non-finite input.
    """
    m = hermitian(m)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if method == "lapack":
        w, v = np.linalg.eigh(m)
    elif method == "jacobi":
        w, v = _jacobi(m)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w)[::-1]
    return EigenDecomposition(w[order], v[:, order])


def inv_sqrt(m) -> np.ndarray:
    """Hermitian ``S`` with ``S M S = I`` for positive definite ``M``."""
    m = hermitian(m)
    w, v = np.linalg.eigh(m)
    tr = np.real(np.trace(m))
    if w[0] <= 1e-12 * max(tr, 0.0) or w[0] <= 0.0:
        raise SingularError(f"matrix not positive definite (min eigenvalue {w[0]:.3e})")
    return hermitian((v / np.sqrt(w)) @ v.conj().T, warn=False)


def psd_project(m) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm (eigenvalue clipping).

    Works on stacks of matrices along the leading axes.
    """
    m = hermitian(m, warn=False)
    w, v = np.linalg.eigh(m)
    w = np.maximum(w, 0.0)
    out = (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    return hermitian(out, warn=False)


def dominant_rank_one(m) -> tuple[float, np.ndarray]:
    """Top eigenpair ``(lambda_1, v_1)`` of a PSD matrix."""
    values, vectors = herm_eig(m)
    return float(values[0]), vectors[:, 0]


def max_generalized_eig(e, f) -> tuple[float, np.ndarray]:
    """Largest ``lambda`` and unit ``u`` maximizing ``u^H E u / u^H F u``.

    Goes through the congruence ``F^{-1/2} E F^{-1/2}``; the maximizer is
    ``F^{-1/2}`` times that matrix's top eigenvector.
    """
    s = inv_sqrt(f)
    lam, v = dominant_rank_one(s @ hermitian(e, warn=False) @ s)
    u = s @ v
    u = u / np.linalg.norm(u)
    return lam, u
