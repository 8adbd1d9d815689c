"""Geometry of two chains with mismatched lattice constants.

Chain 1 sites sit at integer coordinates x_i = i, chain 2 at y_j = (1-D)j
where D is the fractional mismatch; chain 2 packs more sites into the same
span.  Inter-chain tunneling falls off as a Gaussian of the site separation,
which realizes rung-like couplings where the chains align and weaker split
couplings where they are offset by half a site.

Region classification follows the staggered-potential registry: a chain-1
site whose aligned partner carries the same potential sign belongs to a
tetramerized region, one whose partner carries the opposite sign to a
dimerized region, and sites coupling comparably to two partners form the
crossover regions in between.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np


@dataclass(frozen=True)
class MoireSpec:
    """Geometry of the mismatched two-chain ladder.

    n_sites_1/2 are the (even) chain lengths 2*N1 and 2*N2; when n_sites_2
    is omitted it defaults to the nearest even integer to n_sites_1/(1-D),
    so both chains span the same physical length.  alpha is the inverse
    Gaussian range of the inter-chain tunneling, coupling_cutoff the
    smallest stored coupling as a fraction of kappa0.
    """

    n_sites_1: int
    mismatch: float
    kappa0: float = 1.0
    alpha: float = 2.0
    coupling_cutoff: float = 1e-8
    n_sites_2: int | None = None

    def __post_init__(self):
        if self.n_sites_1 < 2 or self.n_sites_1 % 2:
            raise ValueError("n_sites_1 must be a positive even integer")
        if not 0.0 < self.mismatch < 1.0:
            raise ValueError("mismatch must lie in (0, 1)")
        if not np.isfinite(self.kappa0):
            raise ValueError("kappa0 must be finite")
        if not np.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError("alpha must be a non-negative real")
        if not np.isfinite(self.coupling_cutoff) or self.coupling_cutoff < 0:
            raise ValueError("coupling_cutoff must be a non-negative real")
        if self.n_sites_2 is None:
            n2 = 2 * round(self.n_sites_1 / (2.0 * (1.0 - self.mismatch)))
            object.__setattr__(self, "n_sites_2", n2)
        if self.n_sites_2 < 2 or self.n_sites_2 % 2:
            raise ValueError("n_sites_2 must be a positive even integer")
        span_gap = abs(self.n_sites_2 * (1.0 - self.mismatch) - self.n_sites_1)
        if span_gap > 2.0:
            raise ValueError(
                "chains do not span the same length: "
                f"n_sites_2*(1-mismatch) differs from n_sites_1 by {span_gap:.2f} sites"
            )

    def chain2_positions(self) -> np.ndarray:
        return (1.0 - self.mismatch) * np.arange(1, self.n_sites_2 + 1)


@dataclass(frozen=True)
class CouplingTable:
    """Sparse inter-chain couplings: chain-1 site i, chain-2 site j (both
    1-based), and the tunneling amplitude kappa_ij."""

    i: np.ndarray
    j: np.ndarray
    kappa: np.ndarray

    def __len__(self) -> int:
        return len(self.i)

    def to_csv(self, path) -> None:
        from .fileio import write_csv

        write_csv(path, ["i", "j", "kappa"], [self.i, self.j, self.kappa])


class Region(IntEnum):
    TETRAMERIZED = 0
    CROSSOVER = 1
    DIMERIZED = 2


@dataclass(frozen=True)
class RegionLabels:
    """Per chain-1 site: region label, registry offset in units of the
    staggered-potential period (0 = aligned same-sign partner, ~0.5 = aligned
    opposite-sign partner, ~0.25 = half-site offset), the nearest chain-2
    site, and the raw distance to it in chain-1 site units."""

    labels: np.ndarray
    offset: np.ndarray
    nearest_site: np.ndarray
    nearest_distance: np.ndarray
    thresholds: tuple[float, float]

    def to_csv(self, path) -> None:
        from .fileio import write_csv

        names = np.array([Region(v).name for v in self.labels])
        write_csv(
            path,
            ["i", "label", "offset", "nearest_j", "nearest_distance"],
            [
                np.arange(1, len(self.labels) + 1),
                names,
                self.offset,
                self.nearest_site,
                self.nearest_distance,
            ],
        )


def build_couplings(spec: MoireSpec) -> CouplingTable:
    """All inter-chain pairs with kappa_ij >= coupling_cutoff * kappa0.

    kappa_ij = kappa0 * exp(-alpha^2 (i - (1-D)j)^2) exactly, so with
    alpha = 2 an aligned pair couples at kappa0 and a half-site offset at
    exp(-1) * kappa0 = 0.37 kappa0.
    """
    n1, n2 = spec.n_sites_1, spec.n_sites_2
    step = 1.0 - spec.mismatch
    if spec.alpha > 0 and spec.coupling_cutoff > 0:
        d_max = math.sqrt(math.log(1.0 / spec.coupling_cutoff)) / spec.alpha
    else:
        d_max = float(n1 + n2)
    out_i: list[np.ndarray] = []
    out_j: list[np.ndarray] = []
    out_k: list[np.ndarray] = []
    cut = spec.coupling_cutoff * abs(spec.kappa0)
    for i in range(1, n1 + 1):
        j_lo = max(1, math.ceil((i - d_max) / step))
        j_hi = min(n2, math.floor((i + d_max) / step))
        if j_hi < j_lo:
            continue
        j = np.arange(j_lo, j_hi + 1)
        d = i - step * j
        kappa = spec.kappa0 * np.exp(-spec.alpha ** 2 * d * d)
        keep = np.abs(kappa) >= cut
        if np.any(keep):
            out_i.append(np.full(int(keep.sum()), i))
            out_j.append(j[keep])
            out_k.append(kappa[keep])
    if not out_i:
        empty_i = np.zeros(0, dtype=int)
        return CouplingTable(empty_i, empty_i.copy(), np.zeros(0))
    return CouplingTable(
        np.concatenate(out_i), np.concatenate(out_j), np.concatenate(out_k)
    )


def _nearest_with_parity(position: float, parity: int, step: float, n2: int):
    """Nearest chain-2 site to `position` restricted to sites of the given
    parity (0 = even index, 1 = odd); returns (j, distance)."""
    j0 = int(round(position / step))
    best_j = -1
    best_d = math.inf
    for j in range(j0 - 3, j0 + 4):
        if j < 1 or j > n2 or j % 2 != parity:
            continue
        d = abs(position - step * j)
        if d < best_d:
            best_d = d
            best_j = j
    return best_j, best_d


def classify_regions(spec: MoireSpec, table: CouplingTable | None = None,
                     thresholds: tuple[float, float] = (0.15, 0.35)) -> RegionLabels:
    """Label every chain-1 site as tetramerized, crossover, or dimerized.

    The registry offset is half the distance from the site to the nearest
    chain-2 site carrying the same staggered-potential sign, i.e. the
    misalignment in units of the two-site potential period.  Aligned
    same-sign partners give offset 0 (tetramerized); a partner shifted by
    the potential half-period gives offset ~0.5 (dimerized); the half-site
    two-partner geometry sits at ~0.25 (crossover).  The label is a pure
    threshold function of the offset.
    """
    t_low, t_high = thresholds
    if not 0.0 < t_low < t_high < 0.5:
        raise ValueError("thresholds must satisfy 0 < t_low < t_high < 0.5")
    n1, n2 = spec.n_sites_1, spec.n_sites_2
    step = 1.0 - spec.mismatch
    labels = np.empty(n1, dtype=np.int8)
    offsets = np.empty(n1)
    nearest_site = np.empty(n1, dtype=int)
    nearest_distance = np.empty(n1)
    for idx in range(n1):
        i = idx + 1
        j_any = min(max(int(round(i / step)), 1), n2)
        d_any = abs(i - step * j_any)
        for j in (j_any - 1, j_any + 1):
            if 1 <= j <= n2:
                d = abs(i - step * j)
                if d < d_any:
                    d_any, j_any = d, j
        j_same, d_same = _nearest_with_parity(i, i % 2, step, n2)
        offset = 0.5 * d_same if j_same > 0 else 0.5
        if offset <= t_low:
            labels[idx] = Region.TETRAMERIZED
        elif offset >= t_high:
            labels[idx] = Region.DIMERIZED
        else:
            labels[idx] = Region.CROSSOVER
        offsets[idx] = offset
        nearest_site[idx] = j_any
        nearest_distance[idx] = d_any
    return RegionLabels(labels, offsets, nearest_site, nearest_distance,
                        (t_low, t_high))


def minimal_label_period(labels: np.ndarray, trim_fraction: float = 0.1) -> int:
    """Smallest period of the label sequence on its central window.

    The first and last trim_fraction of the chain are dropped to avoid
    boundary effects; returns len(window) when nothing shorter repeats.
    """
    n = len(labels)
    lo = int(n * trim_fraction)
    hi = n - lo
    window = np.asarray(labels[lo:hi])
    m = len(window)
    for p in range(1, m):
        if np.array_equal(window[p:], window[:-p]):
            return p
    return m
