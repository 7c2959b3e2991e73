"""Dense symmetric and orthogonal matrix kernels.

Everything here is deterministic: the eigensolver is a cyclic Jacobi
iteration with a fixed sweep order and a fixed rule for choosing a basis
inside repeated eigenspaces, so identical input always yields bit-identical
output on the same build.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite, NotPSD

__all__ = [
    "CLAMP_TOL",
    "SpectralDecomposition",
    "OrthogonalMatrix",
    "as_symmetric",
    "sym_eigen",
    "psd_sqrt",
    "psd_inv_sqrt",
    "svd",
    "polar_orthogonal_factor",
    "random_orthogonal",
    "rotation_2d",
]

#: Relative tolerance below which negative eigenvalues are treated as rounding.
CLAMP_TOL = 1e-10

_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 100
_TIE_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_symmetric(S) -> np.ndarray:
    """Validate a square finite matrix and return ``(S + S.T) / 2``."""
    S = np.asarray(S, dtype=float)
    if S.ndim == 0:
        S = S.reshape(1, 1)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NonFinite("matrix has NaN or Inf entries")
    return 0.5 * (S + S.T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """``S = eigenvectors @ diag(eigenvalues) @ eigenvectors.T``, ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eigenvalues", _frozen(self.eigenvalues))
        object.__setattr__(self, "eigenvectors", _frozen(self.eigenvectors))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        P = self.eigenvectors
        return (P * self.eigenvalues) @ P.T


@dataclass(frozen=True)
class OrthogonalMatrix:
    """An element of O(d). ``special`` is True for rotations (det = +1)."""

    matrix: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.matrix, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch(f"orthogonal matrix must be square, got {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise NonFinite("orthogonal matrix has NaN or Inf entries")
        err = np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0])))
        if err > 1e-10:
            raise ValueError(f"matrix is not orthogonal (max |Q^T Q - I| = {err:.3e})")
        object.__setattr__(self, "matrix", _frozen(Q))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def special(self) -> bool:
        return bool(np.linalg.det(self.matrix) > 0)

    @property
    def T(self) -> "OrthogonalMatrix":
        return OrthogonalMatrix(self.matrix.T)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix.copy() if copy else self.matrix
        return self.matrix.astype(dtype)

    def __matmul__(self, other):
        if isinstance(other, OrthogonalMatrix):
            return OrthogonalMatrix(self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.matrix


def _jacobi_eigh(S: np.ndarray):
    """Cyclic Jacobi sweeps on a symmetric matrix. Returns (diag, V)."""
    A = np.array(S, dtype=float)
    d = A.shape[0]
    V = np.eye(d)
    scale = np.linalg.norm(A)
    if d == 1 or scale == 0.0:
        return np.diag(A).copy(), V
    target = _JACOBI_TOL * scale
    off_mask = ~np.eye(d, dtype=bool)
    for _ in range(_JACOBI_MAX_SWEEPS):
        if math.sqrt(np.sum(A[off_mask] ** 2)) < target:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diag(A).copy(), V


def _canonical_basis(vals: np.ndarray, vecs: np.ndarray):
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    # orient: largest-magnitude component positive (first one on exact ties)
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs = vecs * signs
    # inside each cluster of equal eigenvalues, columns in descending lexicographic order
    tol = _TIE_TOL * max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
    d = vals.shape[0]
    start = 0
    while start < d:
        stop = start + 1
        while stop < d and vals[stop] - vals[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            keys = [tuple(col) for col in block.T]
            perm = sorted(range(stop - start), key=lambda k: keys[k], reverse=True)
            vecs[:, start:stop] = block[:, perm]
        start = stop
    return vals, vecs


def sym_eigen(S) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix, eigenvalues ascending.

    Raises
    ------
    NonFinite
        If ``S`` has NaN or Inf entries.
    """
    S = as_symmetric(S)
    vals, vecs = _jacobi_eigh(S)
    vals, vecs = _canonical_basis(vals, vecs)
    return SpectralDecomposition(vals, vecs)


def _clamped_spectrum(S) -> SpectralDecomposition:
    dec = sym_eigen(S)
    lam = dec.eigenvalues
    bound = CLAMP_TOL * float(np.max(np.abs(lam)))
    if lam[0] < -bound:
        raise NotPSD(f"matrix is not positive semi-definite (min eigenvalue {lam[0]:.6g})")
    return SpectralDecomposition(np.clip(lam, 0.0, None), dec.eigenvectors)


def psd_sqrt(S) -> np.ndarray:
    """Unique PSD square root, clamping rounding-level negative eigenvalues."""
    dec = _clamped_spectrum(S)
    P = dec.eigenvectors
    R = (P * np.sqrt(dec.eigenvalues)) @ P.T
    return 0.5 * (R + R.T)


def psd_inv_sqrt(S, rel_floor: float = 1e-12) -> np.ndarray:
    """Inverse square root of a strictly positive definite matrix."""
    dec = _clamped_spectrum(S)
    lam = dec.eigenvalues
    if lam[-1] == 0.0 or lam[0] <= rel_floor * lam[-1]:
        raise NotPSD("matrix is not strictly positive definite")
    P = dec.eigenvectors
    R = (P / np.sqrt(lam)) @ P.T
    return 0.5 * (R + R.T)


def _complete_basis(U: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Replace columns not in ``keep`` by an orthonormal completion."""
    d = U.shape[0]
    basis = [U[:, k] for k in range(U.shape[1]) if keep[k]]
    filled = []
    for e in np.eye(d):
        if len(basis) + len(filled) == d:
            break
        v = e.copy()
        for _ in range(2):  # re-orthogonalise once for stability
            for b in basis + filled:
                v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            filled.append(v / nv)
    out = U.copy()
    it = iter(filled)
    for k in range(U.shape[1]):
        if not keep[k]:
            out[:, k] = next(it)
    return out


def svd(A):
    """One-sided (Hestenes) Jacobi SVD of a square matrix.

    Returns ``U, s, V`` with ``A = U @ diag(s) @ V.T`` and ``s`` descending.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix has NaN or Inf entries")
    d = A.shape[0]
    W = A.copy()
    V = np.eye(d)
    eps = np.finfo(float).eps
    for _ in range(_JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                alpha = W[:, p] @ W[:, p]
                beta = W[:, q] @ W[:, q]
                gamma = W[:, p] @ W[:, q]
                if gamma == 0.0 or abs(gamma) <= eps * math.sqrt(alpha * beta):
                    continue
                rotated = True
                if abs(beta - alpha) > 1e150 * abs(gamma):
                    # zeta would overflow; t ~ 1 / (2 zeta)
                    t = gamma / (beta - alpha)
                else:
                    zeta = (beta - alpha) / (2.0 * gamma)
                    t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                wp = W[:, p].copy()
                W[:, p] = c * wp - s * W[:, q]
                W[:, q] = s * wp + c * W[:, q]
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
        if not rotated:
            break
    sv = np.linalg.norm(W, axis=0)
    order = np.argsort(-sv, kind="stable")
    sv = sv[order]
    W = W[:, order]
    V = V[:, order]
    keep = sv > d * eps * (sv[0] if d else 0.0)
    U = np.zeros_like(W)
    U[:, keep] = W[:, keep] / sv[keep]
    if not np.all(keep):
        U = _complete_basis(U, keep)
    return U, sv, V


def polar_orthogonal_factor(A, restrict_special: bool = False) -> OrthogonalMatrix:
    """Orthogonal ``theta`` maximizing ``trace(theta @ A)``.

    With ``A = U S V^T`` this is ``V U^T``. When ``restrict_special`` is set
    and that product is a reflection, the column of ``V`` paired with the
    smallest singular value is negated first, which gives the maximizer over
    SO(d).
    """
    U, _, V = svd(A)
    theta = V @ U.T
    if restrict_special and np.linalg.det(theta) < 0:
        V = V.copy()
        V[:, -1] = -V[:, -1]
        theta = V @ U.T
    return OrthogonalMatrix(theta)


def random_orthogonal(dim: int, seed: int = 0, restrict_special: bool = False) -> OrthogonalMatrix:
    """Haar-distributed sample from O(dim), or SO(dim) if ``restrict_special``.

    QR of a standard Gaussian matrix with the signs of ``diag(R)`` folded into
    ``Q``. For SO(dim) a reflected sample has its first column negated, which
    maps the det = -1 coset onto SO(dim) preserving Haar measure.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    Q = Q * signs
    if restrict_special and np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return OrthogonalMatrix(Q)


def rotation_2d(angle: float, reflect: bool = False) -> np.ndarray:
    """Counter-clockwise rotation by ``angle`` radians, optionally composed with
    the reflection ``diag(1, -1)`` applied first."""
    c, s = math.cos(angle), math.sin(angle)
    R = np.array([[c, -s], [s, c]])
    if reflect:
        R = R @ np.diag([1.0, -1.0])
    return R
