"""Time evolution and Dirac-probability observables.

Closed-form total probabilities for the 4-site and 2-site clusters in their
oscillating, exceptional-point, and broken regimes, the exact linear-in-time
propagator at the exceptional point, and generic exponential-propagator
evolution of any Hamiltonian with per-site probability tracking.  The Dirac
probability is the plain squared norm, which non-Hermitian evolution does
not conserve.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels, linalg
from .lattice import Region, RegionLabels

EP_RTOL = 1e-9
NORM_CAP = 1e300


@dataclass(frozen=True)
class ClusterRegime:
    """Dynamical regime of the 4-site cluster: 'unbroken' (w > gamma,
    oscillation with period pi/wbar), 'ep' (quadratic growth), or 'broken'
    (exponential growth with time constant 1/(2|wbar|))."""

    tag: str
    wbar: complex
    period: float | None
    growth_time: float | None


def cluster_regime(w: float, gamma: float, ep_rtol: float = EP_RTOL) -> ClusterRegime:
    disc = w * w - gamma * gamma
    scale = max(w * w, gamma * gamma)
    if abs(disc) <= ep_rtol * scale or scale == 0.0:
        return ClusterRegime("ep", 0.0 + 0.0j, None, None)
    if disc > 0:
        wbar = float(np.sqrt(disc))
        return ClusterRegime("unbroken", complex(wbar), float(np.pi / wbar), None)
    awbar = float(np.sqrt(-disc))
    return ClusterRegime("broken", 1j * awbar, None, float(1.0 / (2.0 * awbar)))


def tetramer_probability(w: float, gamma: float, kappa: float, t):
    """Total probability of the uniform 4-site cluster state at time t.

    Oscillates as (w/wbar)^2 - (gamma/wbar)^2 cos(2 wbar t) while w > gamma,
    grows as 1 + 2 gamma^2 t^2 at the exceptional point w = gamma, and as
    (gamma/|wbar|)^2 cosh(2|wbar| t) - (w/|wbar|)^2 beyond it.  kappa only
    contributes a global phase and drops out.
    """
    del kappa
    t = np.asarray(t, dtype=float)
    regime = cluster_regime(w, gamma)
    if regime.tag == "ep":
        out = 1.0 + 2.0 * gamma * gamma * t * t
    elif regime.tag == "unbroken":
        wbar2 = w * w - gamma * gamma
        out = (w * w - gamma * gamma * np.cos(2.0 * np.sqrt(wbar2) * t)) / wbar2
    else:
        awbar2 = gamma * gamma - w * w
        out = (gamma * gamma * np.cosh(2.0 * np.sqrt(awbar2) * t) - w * w) / awbar2
    return out if out.ndim else float(out)


def dimer_probability(kappa: float, gamma: float, t):
    """Total probability of the symmetric 2-site gain/loss state at time t;
    valid in the real-spectrum regime kappa > gamma only."""
    if kappa * kappa <= gamma * gamma:
        raise ValueError(
            "dimer closed form requires kappa > gamma (real spectrum); "
            "use evolve() for the broken dimer"
        )
    t = np.asarray(t, dtype=float)
    eps2 = kappa * kappa - gamma * gamma
    out = (kappa * kappa - gamma * gamma * np.cos(2.0 * np.sqrt(eps2) * t)) / eps2
    return out if out.ndim else float(out)


def dimer_period(kappa: float, gamma: float) -> float:
    return float(np.pi / np.sqrt(kappa * kappa - gamma * gamma))


def tetramer_period(w: float, gamma: float) -> float:
    return float(np.pi / np.sqrt(w * w - gamma * gamma))


def ep_state_2x2(kappa: float, gamma: float, a: complex, b: complex, t):
    """Exact evolved state of the defective 2x2 bonding-sector matrix at the
    exceptional point: e^{-i kappa t}((1 - t g) a - i t g b,
    (1 + t g) b - i t g a).  Linear in t, no integration involved."""
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * kappa * t)
    c1 = phase * ((1.0 - t * gamma) * a - 1j * t * gamma * b)
    c2 = phase * ((1.0 + t * gamma) * b - 1j * t * gamma * a)
    return np.stack([c1, c2], axis=-1)


def uniform_state(n_sites: int) -> np.ndarray:
    """Equal amplitude 1/sqrt(n) on every site; unit norm."""
    if n_sites < 1:
        raise ValueError("need at least one site")
    return np.full(n_sites, 1.0 / np.sqrt(n_sites), dtype=np.complex128)


@dataclass(frozen=True)
class Trajectory:
    """Sampled evolution: states[m] at times[m], the per-group site
    probability P(j, t), and the total Dirac probability P(t) = |psi|^2.
    truncated marks an early stop where the norm exceeded the overflow
    guard; arrays only hold the valid samples."""

    times: np.ndarray
    states: np.ndarray
    site_probability: np.ndarray
    total_probability: np.ndarray
    truncated: bool


def evolve(h, psi0, t_max: float, dt_sample: float = 0.05,
           site_groups: list[np.ndarray] | None = None,
           norm_cap: float = NORM_CAP) -> Trajectory:
    """Propagate psi0 under e^{-i H t}, sampling every dt_sample.

    One matrix exponential is computed for the sampling step and applied
    repeatedly; H must be time independent.  site_groups partitions the flat
    basis into observation bins (default: one bin per basis index).
    """
    h = np.asarray(h, dtype=np.complex128)
    psi0 = np.ascontiguousarray(np.asarray(psi0, dtype=np.complex128))
    if dt_sample <= 0:
        raise ValueError("dt_sample must be positive")
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    n_steps = int(round(t_max / dt_sample))
    u = linalg.expm(-1j * dt_sample * h)
    states, n_valid = _kernels.propagate_collect(u, psi0, n_steps, norm_cap)
    truncated = n_valid < n_steps + 1
    states = states[:n_valid]
    times = dt_sample * np.arange(n_valid)
    prob = states.real ** 2 + states.imag ** 2
    if site_groups is None:
        site_prob = prob
    else:
        site_prob = np.empty((n_valid, len(site_groups)))
        for g, idx in enumerate(site_groups):
            site_prob[:, g] = np.sum(prob[:, idx], axis=1)
    total = np.sum(prob, axis=1)
    return Trajectory(times, states, site_prob, total, truncated)


def region_probabilities(traj: Trajectory, labels: RegionLabels) -> dict[str, np.ndarray]:
    """Total probability inside each labeled region versus time.

    The trajectory's site bins must correspond one-to-one with the chain-1
    sites carrying the labels.
    """
    n_bins = traj.site_probability.shape[1]
    if n_bins != len(labels.labels):
        raise ValueError(
            f"trajectory has {n_bins} site bins but labels cover "
            f"{len(labels.labels)} sites"
        )
    out: dict[str, np.ndarray] = {}
    for region in Region:
        mask = labels.labels == region
        out[region.name] = np.sum(traj.site_probability[:, mask], axis=1)
    return out


def first_recurrence_minimum(times: np.ndarray, values: np.ndarray) -> float:
    """Time of the first interior local minimum, refined by parabolic
    interpolation through the three bracketing samples."""
    for m in range(1, len(values) - 1):
        if values[m] <= values[m - 1] and values[m] < values[m + 1]:
            y0, y1, y2 = values[m - 1], values[m], values[m + 1]
            denom = y0 - 2.0 * y1 + y2
            shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
            dt = times[1] - times[0]
            return float(times[m] + shift * dt)
    raise ValueError("no interior local minimum found in the trajectory")
