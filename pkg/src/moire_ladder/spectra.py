"""Bloch dispersions, reality boundaries, and the critical-gamma scanner.

The tetramerized and dimerized ladders have closed-form band structures;
the crossover ladder's 4x4 Bloch kernel is diagonalized numerically.  The
critical gain/loss strength gamma_c of a model at couplings (v, w) is the
largest gamma for which every Bloch eigenvalue stays real; the scanner
locates the first failure of that reality predicate by a coarse ascending
scan refined by bisection.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import linalg
from .hamiltonian import ModelParams

MODELS = ("tetramerized", "dimerized", "crossover")
REALITY_RTOL = 1e-9


@dataclass(frozen=True)
class Dispersion:
    """Bands over a cell-momentum grid; bands[m] holds the 4 eigenvalues of
    the 4-site-cell Bloch kernel at k[m]."""

    model: str
    k: np.ndarray
    bands: np.ndarray

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.bands.imag)))

    def to_csv(self, path, nonreal_threshold: float = 0.0) -> None:
        from .fileio import write_csv

        nk, nb = self.bands.shape
        k_col = np.repeat(self.k, nb)
        band_col = np.tile(np.arange(nb), nk)
        flat = self.bands.reshape(-1)
        cols = [k_col, band_col, flat.real, flat.imag]
        header = ["k", "band", "re", "im"]
        if nonreal_threshold > 0:
            header.append("nonreal")
            cols.append((np.abs(flat.imag) > nonreal_threshold).astype(int))
        write_csv(path, header, cols)


class GammaCritical(NamedTuple):
    value: float
    saturated: bool


def k_grid(n: int) -> np.ndarray:
    """Uniform cell-momentum grid on [0, 2pi)."""
    if n < 1:
        raise ValueError("k grid needs at least one point")
    return 2.0 * np.pi * np.arange(n) / n


def tetramer_eps0(p: ModelParams, k) -> np.ndarray:
    """Hermitian SSH dispersion sqrt(4 w v cos^2(k/2) + (w - v)^2)."""
    k = np.asarray(k, dtype=float)
    return np.sqrt(4.0 * p.w * p.v * np.cos(k / 2.0) ** 2 + (p.w - p.v) ** 2)


def tetramer_gap(p: ModelParams) -> complex:
    """Branch gap sqrt((w - v)^2 - gamma^2); imaginary once gamma exceeds |w - v|."""
    return complex(np.sqrt(np.complex128((p.w - p.v) ** 2 - p.gamma ** 2)))


def dispersion_tetramer(p: ModelParams, k) -> Dispersion:
    """Bands sigma*kappa +/- sqrt(eps0(k)^2 - gamma^2), sigma = +/-1.

    Columns: (+,+), (+,-), (-,+), (-,-) in (sigma, branch) order.
    """
    k = np.asarray(k, dtype=float)
    rad = np.sqrt((tetramer_eps0(p, k) ** 2 - p.gamma ** 2).astype(np.complex128))
    bands = np.stack(
        [p.kappa + rad, p.kappa - rad, -p.kappa + rad, -p.kappa - rad], axis=1
    )
    return Dispersion("tetramerized", k, bands)


def dimer_eps0(p: ModelParams, k) -> np.ndarray:
    """|w e^{-ik} + v e^{ik} + kappa|, the gamma = 0 dispersion of the
    dimerized ladder's 2x2 kernel."""
    k = np.asarray(k, dtype=float)
    return np.abs(p.w * np.exp(-1j * k) + p.v * np.exp(1j * k) + p.kappa)


def dimer_kernel(p: ModelParams, k: float) -> np.ndarray:
    """2x2 Bloch kernel of the dimerized ladder at momentum k."""
    lam = p.w * np.exp(1j * k) + p.v * np.exp(-1j * k) + p.kappa
    lam_c = p.w * np.exp(-1j * k) + p.v * np.exp(1j * k) + p.kappa
    return np.array(
        [[1j * p.gamma, lam], [lam_c, -1j * p.gamma]], dtype=np.complex128
    )


def dimer_bands(p: ModelParams, k) -> np.ndarray:
    """The pair +/- sqrt(eps0(k)^2 - gamma^2) at each plain momentum k."""
    rad = np.sqrt((dimer_eps0(p, k) ** 2 - p.gamma ** 2).astype(np.complex128))
    return np.stack([rad, -rad], axis=-1)


def dispersion_dimer(p: ModelParams, k) -> Dispersion:
    """Four bands on the 4-site-cell convention: the 2x2 kernel evaluated at
    half the cell momentum and at its zone-folded partner."""
    k = np.asarray(k, dtype=float)
    lower = dimer_bands(p, k / 2.0)
    upper = dimer_bands(p, k / 2.0 + np.pi)
    return Dispersion("dimerized", k, np.concatenate([lower, upper], axis=1))


def crossover_kernel(p: ModelParams, k: float) -> np.ndarray:
    """4x4 Bloch kernel of the zig-zag (crossover) ladder at momentum k."""
    lam = p.w + p.v * np.exp(1j * k)
    lam_m = p.w + p.v * np.exp(-1j * k)
    kp = p.kappa_prime
    g = p.gamma
    return np.array(
        [
            [-1j * g, lam, kp, kp],
            [lam_m, 1j * g, kp * np.exp(-1j * k), kp],
            [kp, kp * np.exp(1j * k), -1j * g, lam],
            [kp, kp, lam_m, 1j * g],
        ],
        dtype=np.complex128,
    )


def crossover_kernel_stack(p: ModelParams, k) -> np.ndarray:
    k = np.atleast_1d(np.asarray(k, dtype=float))
    mats = np.empty((len(k), 4, 4), dtype=np.complex128)
    for m, km in enumerate(k):
        mats[m] = crossover_kernel(p, km)
    return mats


def dispersion_crossover(p: ModelParams, k) -> Dispersion:
    """Numerical bands of the crossover kernel, sorted by (Re, Im) per k."""
    k = np.asarray(k, dtype=float)
    vals = linalg.eigvals_batch(crossover_kernel_stack(p, k))
    order = np.lexsort((vals.imag, vals.real), axis=-1)
    vals = np.take_along_axis(vals, order, axis=-1)
    return Dispersion("crossover", k, vals)


def _check_model(model: str) -> str:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return model


def _reality_threshold(v: float, w: float, coupling: float) -> float:
    return REALITY_RTOL * max(abs(w), abs(v), abs(coupling))


def _max_imag_fn(model: str, v: float, w: float, coupling: float, k_points: int):
    """Return gamma -> max_k |Im eps(k; gamma)| for the given model."""
    kk = k_grid(k_points)
    if model == "tetramerized":
        p = ModelParams(w=w, v=v, kappa=coupling)
        min_eps0 = float(np.min(tetramer_eps0(p, kk)))

        def max_imag(gamma: float) -> float:
            return float(np.sqrt(max(0.0, gamma * gamma - min_eps0 * min_eps0)))

    elif model == "dimerized":
        p = ModelParams(w=w, v=v, kappa=coupling)
        min_eps0 = float(np.min(dimer_eps0(p, kk)))

        def max_imag(gamma: float) -> float:
            return float(np.sqrt(max(0.0, gamma * gamma - min_eps0 * min_eps0)))

    else:

        def max_imag(gamma: float) -> float:
            p = ModelParams(w=w, v=v, kappa_prime=coupling, gamma=gamma)
            vals = linalg.eigvals_batch(crossover_kernel_stack(p, kk))
            return float(np.max(np.abs(vals.imag)))

    return max_imag


def analytic_gamma_c(model: str, v: float, w: float, coupling: float = 1.0,
                     k_points: int = 512) -> float:
    """Closed-form gamma_c where available: |w - v| for the tetramerized
    ladder, min_k eps0(k) (dense scan) for the dimerized one."""
    _check_model(model)
    if model == "tetramerized":
        return abs(w - v)
    if model == "dimerized":
        p = ModelParams(w=w, v=v, kappa=coupling)
        return float(np.min(dimer_eps0(p, k_grid(k_points))))
    raise ValueError("no closed form for the crossover model")


def critical_gamma(model: str, v: float, w: float, coupling: float = 1.0,
                   k_points: int = 512, tol: float = 1e-7,
                   gamma_max: float | None = None, coarse_steps: int = 64,
                   method: str = "bisect") -> GammaCritical:
    """Critical gain/loss strength of a regular-ladder model at (v, w).

    The reality predicate holds at gamma when the largest |Im eps| over the
    momentum grid stays below a relative threshold; the scanner walks gamma
    upward in coarse steps to bracket the first failure, then bisects to
    tol.  When the spectrum stays real all the way to gamma_max the value
    saturates and the flag is set.  method="analytic" returns the closed
    form where one exists.
    """
    _check_model(model)
    if k_points < 64:
        raise ValueError("k_points must be at least 64")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if method == "analytic":
        return GammaCritical(analytic_gamma_c(model, v, w, coupling, k_points), False)
    if method != "bisect":
        raise ValueError(f"unknown method {method!r}")
    if gamma_max is None:
        gamma_max = 4.0 * max(abs(w), abs(v), abs(coupling))
    if gamma_max <= 0:
        return GammaCritical(0.0, False)
    threshold = _reality_threshold(v, w, coupling)
    max_imag = _max_imag_fn(model, v, w, coupling, k_points)
    lo = 0.0
    hi = None
    for step in range(1, coarse_steps + 1):
        g = gamma_max * step / coarse_steps
        if max_imag(g) > threshold:
            hi = g
            break
        lo = g
    if hi is None:
        return GammaCritical(gamma_max, True)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if max_imag(mid) > threshold:
            hi = mid
        else:
            lo = mid
    return GammaCritical(0.5 * (lo + hi), False)


@dataclass(frozen=True)
class PhaseDiagramGrid:
    """gamma_c sampled over a rectangle of the (v, w) plane; gamma_c[a, b]
    belongs to (w_values[a], v_values[b])."""

    model: str
    v_values: np.ndarray
    w_values: np.ndarray
    gamma_c: np.ndarray
    saturated: np.ndarray

    @property
    def saturation_count(self) -> int:
        return int(np.sum(self.saturated))

    def to_csv(self, path) -> None:
        from .fileio import write_csv

        nv = len(self.v_values)
        nw = len(self.w_values)
        v_col = np.tile(self.v_values, nw)
        w_col = np.repeat(self.w_values, nv)
        write_csv(
            path,
            ["v", "w", "gamma_c", "saturated"],
            [v_col, w_col, self.gamma_c.reshape(-1),
             self.saturated.reshape(-1).astype(int)],
        )

    def to_pgm(self, path) -> None:
        """8-bit grayscale, min-max normalized; top row = largest w."""
        from .fileio import write_pgm

        write_pgm(path, self.gamma_c[::-1, :])


def phase_diagram(model: str, v_values, w_values, coupling: float = 1.0,
                  k_points: int = 512, tol: float = 1e-6,
                  gamma_max: float | None = None, coarse_steps: int = 64,
                  method: str = "bisect") -> PhaseDiagramGrid:
    """gamma_c on every grid cell; cells are independent and assembled in
    row-major order for deterministic output."""
    _check_model(model)
    v_values = np.asarray(v_values, dtype=float)
    w_values = np.asarray(w_values, dtype=float)
    if v_values.ndim != 1 or w_values.ndim != 1:
        raise ValueError("v_values and w_values must be 1-d")
    if not (np.all(np.isfinite(v_values)) and np.all(np.isfinite(w_values))):
        raise ValueError("grid values must be finite")
    gc = np.empty((len(w_values), len(v_values)))
    sat = np.zeros((len(w_values), len(v_values)), dtype=bool)
    for a, w in enumerate(w_values):
        for b, v in enumerate(v_values):
            res = critical_gamma(model, v, w, coupling, k_points, tol,
                                 gamma_max, coarse_steps, method)
            gc[a, b] = res.value
            sat[a, b] = res.saturated
    return PhaseDiagramGrid(model, v_values, w_values, gc, sat)
