"""Complex Hermitian linear algebra: spectral decompositions, matrix
functions on supports, positive parts, tensor powers and random states.

Small matrices (dim <= ``JACOBI_MAX_DIM``) are diagonalised by a cyclic
complex Jacobi iteration; larger ones (tensor powers in the oracles) go to
LAPACK through :func:`numpy.linalg.eigh`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DimCapExceeded, NoConvergence, NonHermitian, SingularInput, ValidationError

TOL_HERM = 1e-10
TOL_PSD = 1e-10
TOL_TRACE = 1e-10
RANK_TOL = 1e-12
ORACLE_DIM_CAP = 4096
JACOBI_MAX_DIM = 16
JACOBI_MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # real, sorted descending
    eigenvectors: np.ndarray  # unitary, columns

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def hermitian_residual(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def _as_square(h) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("shape", message=f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValidationError("finiteness", message="matrix has non-finite entries")
    return h


def symmetrize(h, tol: float = TOL_HERM) -> np.ndarray:
    """Check hermiticity within ``tol`` and return ``(H + H^dagger) / 2``."""
    h = _as_square(h)
    res = hermitian_residual(h)
    if res > tol:
        raise NonHermitian(res)
    h = h.astype(complex)
    return (h + h.conj().T) / 2


def _jacobi(a: np.ndarray, max_sweeps: int = JACOBI_MAX_SWEEPS):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=complex)
    norm = np.linalg.norm(a)
    if norm == 0.0 or n == 1:
        return a.diagonal().real.copy(), v
    stop = 1e-15 * norm
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= stop:
            return a.diagonal().real.copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                ab = abs(b)
                if ab <= 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                phase = b / ab
                theta = (aqq - app) / (2.0 * ab)
                if abs(theta) > 1e150:
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # 2x2 block R = diag(phase, 1) @ [[c, s], [-s, c]]
                r00, r01 = phase * c, phase * s
                cp = a[:, p].copy()
                cq = a[:, q]
                a[:, p] = r00 * cp - s * cq
                a[:, q] = r01 * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = r00.conjugate() * rp - s * rq
                a[q, :] = r01.conjugate() * rp + c * rq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = app - t * ab
                a[q, q] = aqq + t * ab
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = r00 * vp - s * vq
                v[:, q] = r01 * vp + c * vq
    raise NoConvergence(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def eigh(h, method: str = "auto") -> EigenDecomposition:
    """Spectral decomposition of a Hermitian matrix, eigenvalues descending.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM``).
    """
    h = symmetrize(h)
    if method == "auto":
        method = "jacobi" if h.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        w, v = _jacobi(h)
    elif method == "lapack":
        w, v = np.linalg.eigh(h)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(-w, kind="stable")
    return EigenDecomposition(w[order], v[:, order])


def eigvalsh(h, method: str = "auto") -> np.ndarray:
    h = symmetrize(h)
    if method == "auto" and h.shape[0] > JACOBI_MAX_DIM:
        return np.linalg.eigvalsh(h)[::-1]
    return eigh(h, method).eigenvalues


def positive_part_trace(h) -> float:
    """Trace of the positive part, i.e. the sum of nonnegative eigenvalues."""
    w = eigvalsh(h)
    return float(np.sum(w[w > 0.0]))


def support_mask(eigenvalues: np.ndarray) -> np.ndarray:
    lam_max = float(np.max(eigenvalues)) if eigenvalues.size else 0.0
    if lam_max <= 0.0:
        return np.zeros(eigenvalues.shape, dtype=bool)
    return eigenvalues > RANK_TOL * lam_max


def spectral_function(dec: EigenDecomposition, f: Callable, on_support: bool = True) -> np.ndarray:
    w = dec.eigenvalues
    if on_support:
        mask = support_mask(w)
        fw = np.zeros(w.shape)
        if mask.any():
            fw[mask] = f(w[mask])
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            fw = np.asarray(f(np.clip(w, 0.0, None)), dtype=float)
        if not np.all(np.isfinite(fw)):
            raise SingularInput("matrix function undefined on the kernel; use on_support=True")
    u = dec.eigenvectors
    return (u * fw) @ u.conj().T


def matrix_function(a, f: Callable, on_support: bool = True) -> np.ndarray:
    """Apply the scalar map ``f`` to the spectrum of a PSD matrix.

    With ``on_support`` eigenvalues at or below ``RANK_TOL * lambda_max``
    are sent to zero instead of being passed to ``f``.
    """
    return spectral_function(decompose(a), f, on_support)


def tensor_power(m, n: int, cap: int = ORACLE_DIM_CAP) -> np.ndarray:
    m = as_matrix(m)
    if n < 1:
        raise ValueError("n must be a positive integer")
    dim = m.shape[0] ** n
    if dim > cap:
        raise DimCapExceeded(dim, cap)
    out = m
    for _ in range(n - 1):
        out = np.kron(out, m)
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated quantum state: Hermitian, PSD and unit trace."""

    matrix: np.ndarray
    _dec: EigenDecomposition = field(init=False, repr=False)

    def __post_init__(self):
        m = _as_square(self.matrix)
        res = hermitian_residual(m)
        if res > TOL_HERM:
            raise NonHermitian(res)
        m = (m.astype(complex) + m.conj().T) / 2
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > TOL_TRACE:
            raise ValidationError("trace", abs(tr - 1.0))
        dec = eigh(m)
        if dec.eigenvalues[-1] < -TOL_PSD:
            raise ValidationError("positivity", -float(dec.eigenvalues[-1]))
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_dec", dec)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def eig(self) -> EigenDecomposition:
        return self._dec

    def purity(self) -> float:
        return float(np.sum(self._dec.eigenvalues**2))

    @classmethod
    def diag(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)))

    @classmethod
    def pure(cls, vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def as_matrix(x) -> np.ndarray:
    """Density-like input as a complex matrix.

    Accepts a :class:`DensityMatrix`, a square array, or a 1-D probability
    vector (embedded on the diagonal).
    """
    if isinstance(x, DensityMatrix):
        return x.matrix
    a = np.asarray(x)
    if a.ndim == 1:
        return np.diag(a.astype(complex))
    return _as_square(a).astype(complex)


def decompose(x) -> EigenDecomposition:
    if isinstance(x, DensityMatrix):
        return x.eig
    return eigh(as_matrix(x))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = r.diagonal()
    return q * (d / np.abs(d))


def random_pure(dim: int, rng: np.random.Generator) -> DensityMatrix:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityMatrix.pure(v)


def random_density(dim: int, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random state ``G G^dagger / Tr(G G^dagger)`` from a dim x rank Ginibre matrix.

    ``seed`` may be an int or a :class:`numpy.random.Generator`.
    """
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = (rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))) / math.sqrt(2)
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)
