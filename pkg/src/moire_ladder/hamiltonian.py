"""Hamiltonian builders for the two-leg ladder family.

Three periodic regular ladders (tetramerized, dimerized, crossover), the
finite mismatched-chain ladder with Gaussian inter-chain couplings, the
4-site and 2-site cluster Hamiltonians, the parity/time-reversal symmetry
check, and the bonding/antibonding block decomposition.

Site convention: sites are 1-based, legs are 1 or 2.  A ladder with L sites
per leg stores site (l, leg) at flat index (leg - 1) * L + (l - 1).  The
staggered gain/loss potential on site l is +i*gamma*(-1)^l, so odd sites
carry -i*gamma (loss) and even sites +i*gamma (gain).  The cluster matrices
use the site-major order |1,1>, |1,2>, |2,1>, |2,2> instead.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import MoireSpec, CouplingTable, build_couplings


@dataclass(frozen=True)
class ModelParams:
    """Couplings of a regular ladder: strong/weak intra-leg hops w, v, rung
    hop kappa, zig-zag hop kappa_prime, gain/loss strength gamma, and the
    number of 4-site cells per leg."""

    w: float
    v: float
    kappa: float = 0.0
    kappa_prime: float = 0.0
    gamma: float = 0.0
    cells: int = 2

    def __post_init__(self):
        for name in ("w", "v", "kappa", "kappa_prime", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.cells < 1:
            raise ValueError("cells must be a positive integer")


def flat_index(l: int, leg: int, sites_per_leg: int) -> int:
    """Flat basis index of site (l, leg), both 1-based."""
    if not 1 <= l <= sites_per_leg:
        raise ValueError(f"site index {l} outside [1, {sites_per_leg}]")
    if leg not in (1, 2):
        raise ValueError("leg must be 1 or 2")
    return (leg - 1) * sites_per_leg + (l - 1)


def site_of_index(i: int, sites_per_leg: int) -> tuple[int, int]:
    """Inverse of flat_index: (l, leg), 1-based."""
    leg, l0 = divmod(i, sites_per_leg)
    return l0 + 1, leg + 1


def _require_cells(p: ModelParams) -> int:
    if p.cells < 2:
        raise ValueError(
            "periodic ladder builders need cells >= 2; a single cell would "
            "double-count the wrap-around bond"
        )
    return p.cells


def _staggered_diagonal(h: np.ndarray, sites_per_leg: int, gamma: float,
                        leg_sign: tuple[int, int]) -> None:
    for leg in (1, 2):
        for l in range(1, sites_per_leg + 1):
            i = flat_index(l, leg, sites_per_leg)
            h[i, i] = 1j * gamma * leg_sign[leg - 1] * (-1) ** l


def build_tetramerized(p: ModelParams) -> np.ndarray:
    """Periodic ladder with aligned legs: w/v alternation on both legs, rung
    coupling kappa on every site pair, identical staggered potential on both
    legs.  4N x 4N for N cells."""
    n = _require_cells(p)
    ns = 2 * n
    h = np.zeros((2 * ns, 2 * ns), dtype=np.complex128)
    for leg in (1, 2):
        for l in range(1, n + 1):
            a = flat_index(2 * l - 1, leg, ns)
            b = flat_index(2 * l, leg, ns)
            c = flat_index(2 * l % ns + 1, leg, ns)  # 2l+1 with periodic wrap
            h[a, b] = h[b, a] = p.w
            h[b, c] += p.v
            h[c, b] += p.v
    for l in range(1, ns + 1):
        i = flat_index(l, 1, ns)
        j = flat_index(l, 2, ns)
        h[i, j] = h[j, i] = p.kappa
    _staggered_diagonal(h, ns, p.gamma, (1, 1))
    return h


def build_dimerized(p: ModelParams) -> np.ndarray:
    """Periodic ladder with the w/v pattern swapped between the legs and the
    staggered potential offset by one site on leg 1 (sign (-1)^(l+leg))."""
    n = _require_cells(p)
    ns = 2 * n
    h = np.zeros((2 * ns, 2 * ns), dtype=np.complex128)
    for l in range(1, n + 1):
        a1 = flat_index(2 * l - 1, 1, ns)
        b1 = flat_index(2 * l, 1, ns)
        c1 = flat_index(2 * l % ns + 1, 1, ns)
        h[a1, b1] = h[b1, a1] = p.v
        h[b1, c1] += p.w
        h[c1, b1] += p.w
        a2 = flat_index(2 * l - 1, 2, ns)
        b2 = flat_index(2 * l, 2, ns)
        c2 = flat_index(2 * l % ns + 1, 2, ns)
        h[a2, b2] = h[b2, a2] = p.w
        h[b2, c2] += p.v
        h[c2, b2] += p.v
    for l in range(1, ns + 1):
        i = flat_index(l, 1, ns)
        j = flat_index(l, 2, ns)
        h[i, j] = h[j, i] = p.kappa
    _staggered_diagonal(h, ns, p.gamma, (-1, 1))
    return h


def build_crossover(p: ModelParams) -> np.ndarray:
    """Periodic ladder with SSH legs as in the tetramerized case but zig-zag
    inter-leg coupling kappa_prime on (l,1)-(l,2) and (l,1)-(l+1,2)."""
    n = _require_cells(p)
    ns = 2 * n
    h = np.zeros((2 * ns, 2 * ns), dtype=np.complex128)
    for leg in (1, 2):
        for l in range(1, n + 1):
            a = flat_index(2 * l - 1, leg, ns)
            b = flat_index(2 * l, leg, ns)
            c = flat_index(2 * l % ns + 1, leg, ns)
            h[a, b] = h[b, a] = p.w
            h[b, c] += p.v
            h[c, b] += p.v
    for l in range(1, ns + 1):
        i = flat_index(l, 1, ns)
        j = flat_index(l, 2, ns)
        j2 = flat_index(l % ns + 1, 2, ns)
        h[i, j] += p.kappa_prime
        h[j, i] += p.kappa_prime
        h[i, j2] += p.kappa_prime
        h[j2, i] += p.kappa_prime
    _staggered_diagonal(h, ns, p.gamma, (1, 1))
    return h


def build_moire(spec: MoireSpec, p: ModelParams,
                table: CouplingTable | None = None) -> np.ndarray:
    """Open-boundary ladder of two mismatched chains.

    Each chain carries its own w/v alternation and the staggered potential
    +i*gamma*(-1)^l; inter-chain terms come from the Gaussian coupling table.
    Basis: chain-1 sites first (flat 0 .. n1-1), then chain-2 sites.
    """
    n1, n2 = spec.n_sites_1, spec.n_sites_2
    if n1 % 2 or n2 % 2:
        raise ValueError("chain lengths must be even")
    if table is None:
        table = build_couplings(spec)
    dim = n1 + n2
    h = np.zeros((dim, dim), dtype=np.complex128)
    for offset, ns in ((0, n1), (n1, n2)):
        for l in range(1, ns):
            hop = p.w if l % 2 == 1 else p.v
            a = offset + l - 1
            h[a, a + 1] = h[a + 1, a] = hop
        for l in range(1, ns + 1):
            i = offset + l - 1
            h[i, i] = 1j * p.gamma * (-1) ** l
    for i, j, kappa in zip(table.i, table.j, table.kappa):
        a = i - 1
        b = n1 + j - 1
        h[a, b] = h[b, a] = kappa
    return h


def tetramer_cluster(w: float, gamma: float, kappa: float) -> np.ndarray:
    """4-site cluster (two rungs joined by strong bonds), site-major basis
    |1,1>, |1,2>, |2,1>, |2,2>."""
    return np.array(
        [
            [-1j * gamma, kappa, w, 0],
            [kappa, -1j * gamma, 0, w],
            [w, 0, 1j * gamma, kappa],
            [0, w, kappa, 1j * gamma],
        ],
        dtype=np.complex128,
    )


def dimer_cluster(kappa: float, gamma: float) -> np.ndarray:
    """2-site gain/loss rung, basis |1,1>, |1,2>."""
    return np.array(
        [[1j * gamma, kappa], [kappa, -1j * gamma]], dtype=np.complex128
    )


def parity_operator(cells: int) -> np.ndarray:
    """Reflection P |l, leg> = |2N - l + 1, leg> as an explicit matrix."""
    if cells < 1:
        raise ValueError("cells must be >= 1")
    ns = 2 * cells
    perm = _parity_permutation(ns)
    p = np.zeros((2 * ns, 2 * ns))
    p[np.arange(2 * ns), perm] = 1.0
    return p


def _parity_permutation(sites_per_leg: int) -> np.ndarray:
    rev = np.arange(sites_per_leg)[::-1]
    return np.concatenate([rev, sites_per_leg + rev])


def pt_residual(h: np.ndarray) -> float:
    """Frobenius norm of P conj(H) P - H; zero iff [PT, H] = 0 in this basis.

    Time reversal is complex conjugation, parity the site reflection above.
    H must be a square-ladder matrix (dimension divisible by 4).
    """
    h = np.asarray(h, dtype=np.complex128)
    dim = h.shape[0]
    if h.ndim != 2 or h.shape[1] != dim or dim % 4:
        raise ValueError("pt_residual expects a 4N x 4N ladder matrix")
    perm = _parity_permutation(dim // 2)
    transformed = np.conj(h)[np.ix_(perm, perm)]
    return float(np.sqrt(np.sum(np.abs(transformed - h) ** 2)))


def leg_exchange_blocks(h: np.ndarray, tol: float = 1e-12):
    """Split a leg-exchange-symmetric ladder into bonding/antibonding blocks.

    The rotation |l, +/-> = (|l,1> +/- |l,2>)/sqrt(2) block-diagonalizes any
    H = [[A, B], [B, A]] into (A + B) oplus (A - B).  Raises when the input
    lacks that structure; returns (h_plus, h_minus, off_residual).
    """
    h = np.asarray(h, dtype=np.complex128)
    dim = h.shape[0]
    if h.ndim != 2 or h.shape[1] != dim or dim % 2:
        raise ValueError("expected an even-dimensional square matrix")
    ns = dim // 2
    a11 = h[:ns, :ns]
    a12 = h[:ns, ns:]
    a21 = h[ns:, :ns]
    a22 = h[ns:, ns:]
    h_plus = (a11 + a22 + a12 + a21) / 2
    h_minus = (a11 + a22 - a12 - a21) / 2
    off_upper = (a11 - a22 - a12 + a21) / 2
    off_lower = (a11 - a22 + a12 - a21) / 2
    off = float(np.sqrt(np.sum(np.abs(off_upper) ** 2) + np.sum(np.abs(off_lower) ** 2)))
    scale = max(float(np.sqrt(np.sum(np.abs(h) ** 2))), 1.0)
    if off > tol * scale:
        raise ValueError(
            "matrix is not leg-exchange symmetric: rotated off-block residual "
            f"{off:.3e} exceeds {tol:.1e} * {scale:.3e}"
        )
    return h_plus, h_minus, off


def ladder_site_groups(cells: int) -> list[np.ndarray]:
    """Flat-index groups per rung (site index j summed over both legs)."""
    ns = 2 * cells
    return [np.array([l, ns + l]) for l in range(ns)]


def cluster_site_groups(n_rungs: int) -> list[np.ndarray]:
    """Groups for the site-major cluster basis: rung l holds indices 2l, 2l+1."""
    return [np.array([2 * l, 2 * l + 1]) for l in range(n_rungs)]


def moire_site_groups(spec: MoireSpec) -> list[np.ndarray]:
    """Per chain-1 coordinate: the chain-1 site plus every chain-2 site whose
    position rounds to that coordinate.  Groups partition all sites, so the
    per-group probabilities add up to the total Dirac probability."""
    n1, n2 = spec.n_sites_1, spec.n_sites_2
    groups = [[l] for l in range(n1)]
    y = (1.0 - spec.mismatch) * np.arange(1, n2 + 1)
    nearest = np.clip(np.rint(y).astype(int), 1, n1)
    for j2, target in enumerate(nearest):
        groups[target - 1].append(n1 + j2)
    return [np.array(g) for g in groups]


def export_matrix_csv(h: np.ndarray, path) -> None:
    """Write the non-zero entries as CSV rows (row, col, re, im), 0-based."""
    from .fileio import write_csv

    h = np.asarray(h, dtype=np.complex128)
    rows, cols = np.nonzero(h)
    write_csv(
        path,
        ["row", "col", "re", "im"],
        [rows, cols, h[rows, cols].real, h[rows, cols].imag],
    )
