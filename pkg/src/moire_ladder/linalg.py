"""Self-contained dense complex linear algebra.

General (non-Hermitian) eigensolver via Hessenberg reduction plus shifted QR,
matrix exponential via scaling-and-squaring with a fixed order-13 Pade
approximant, and a fixed-step RK4 integrator for i d/dt psi = H psi that
serves as an independent cross-check of the exponential-propagator route.

All functions are pure and deterministic: identical inputs give bit-identical
outputs on a given backend.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_DIM_CAP = 2048
SWEEPS_PER_DIM = 30


class EigenConvergenceError(RuntimeError):
    """QR iteration failed to deflate within the sweep budget."""

    def __init__(self, dim: int, sweeps: int):
        self.dim = dim
        self.sweeps = sweeps
        super().__init__(
            f"QR iteration did not converge for a {dim}x{dim} matrix "
            f"after {sweeps} sweeps"
        )


class ExpmOverflowError(RuntimeError):
    """Matrix exponential overflowed during the squaring phase."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (sorted by real part, then imaginary part), optional
    eigenvector columns, and per-pair relative residuals ||Av - lv||/||A||_F."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    residuals: np.ndarray


def _as_square_complex(a, name: str, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError(f"{name} must have dimension >= 1")
    if a.shape[0] > dim_cap:
        raise ValueError(f"{name} dimension {a.shape[0]} exceeds cap {dim_cap}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(a)


def _as_complex_vector(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-d vector, got shape {v.shape}")
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return np.ascontiguousarray(v)


def eig(a, want_vectors: bool = True, dim_cap: int = DEFAULT_DIM_CAP,
        max_sweeps: int | None = None) -> EigenDecomposition:
    """Full eigendecomposition of a general complex matrix.

    Eigenvalues are returned sorted lexicographically by (Re, Im) so output
    files are deterministic; eigenvector columns and residuals follow the
    same order.
    """
    a = _as_square_complex(a, "A", dim_cap)
    n = a.shape[0]
    if max_sweeps is None:
        max_sweeps = SWEEPS_PER_DIM * n
    h, q = _kernels.hessenberg(a)
    sweeps = _kernels.qr_schur(h, q, max_sweeps, want_vectors)
    if sweeps < 0:
        raise EigenConvergenceError(n, max_sweeps)
    lam = np.diag(h).copy()
    order = np.lexsort((lam.imag, lam.real))
    lam = lam[order]
    if not want_vectors:
        return EigenDecomposition(lam, None, np.zeros(0))
    vecs = _kernels.schur_vectors(h, q)[:, order]
    anorm = np.sqrt(np.sum(np.abs(a) ** 2))
    denom = anorm if anorm > 0 else 1.0
    residuals = np.sqrt(np.sum(np.abs(a @ vecs - vecs * lam[None, :]) ** 2, axis=0)) / denom
    return EigenDecomposition(lam, vecs, residuals)


def eigvals(a, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Eigenvalues only, sorted by (Re, Im)."""
    return eig(a, want_vectors=False, dim_cap=dim_cap).eigenvalues


def eigvals_batch(mats) -> np.ndarray:
    """Eigenvalues of a stack of small matrices (unsorted within each row)."""
    mats = np.ascontiguousarray(np.asarray(mats, dtype=np.complex128))
    if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
        raise ValueError(f"expected a (m, n, n) stack, got shape {mats.shape}")
    out = _kernels.eigvals_batch(mats, SWEEPS_PER_DIM * mats.shape[1])
    if out.shape[0] != mats.shape[0]:
        raise EigenConvergenceError(mats.shape[1], SWEEPS_PER_DIM * mats.shape[1])
    return out


def expm(a, dim_cap: int = DEFAULT_DIM_CAP) -> np.ndarray:
    """Matrix exponential e^A by scaling-and-squaring (Pade order 13)."""
    a = _as_square_complex(a, "A", dim_cap)
    result, ok = _kernels.expm_core(a)
    if not ok:
        raise ExpmOverflowError(
            f"expm overflowed in the squaring phase for a {a.shape[0]}x{a.shape[0]} "
            "matrix (norm beyond representable range)"
        )
    return result


def integrate_schrodinger(h, psi0, t_max: float, dt: float):
    """Fixed-step RK4 for i d/dt psi = H psi.

    Returns (times, states): states[m] is psi at times[m], recorded at every
    step including t = 0.  Global error is O(dt^4).
    """
    h = _as_square_complex(h, "H")
    psi0 = _as_complex_vector(psi0, "psi0")
    if psi0.shape[0] != h.shape[0]:
        raise ValueError("psi0 length does not match H dimension")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n_steps = int(round(t_max / dt))
    states = _kernels.rk4_schrodinger(h, psi0, n_steps, dt)
    times = dt * np.arange(n_steps + 1)
    return times, states
