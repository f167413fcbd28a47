"""Search grids, pseudo-spectrum curves and minimum finding."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array import UlaGeometry, check_doa, steering_matrix
from .errors import DomainError, InsufficientPeaksError

KINDS = ("nc_preliminary", "ncn", "circular", "ncm", "music", "nc_music")
_LOG_FLOOR = np.finfo(float).tiny


@dataclass(frozen=True)
class SearchGrid:
    """Uniform angle grid together with its precomputed steering matrix."""

    geometry: UlaGeometry
    angles: np.ndarray
    steering: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        angles = np.atleast_1d(check_doa(self.angles)).astype(float)
        if angles.size < 3 or np.any(np.diff(angles) <= 0):
            raise DomainError("grid needs at least 3 strictly increasing angles")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "steering", steering_matrix(self.geometry, angles))

    @classmethod
    def uniform(cls, geometry: UlaGeometry, step: float = 0.05,
                start: float = 0.5, stop: float = 179.5) -> "SearchGrid":
        n = int(round((stop - start) / step)) + 1
        return cls(geometry, start + step * np.arange(n))


@dataclass(frozen=True)
class SpectrumCurve:
    """Pseudo-spectrum denominator f(theta); DOAs sit at its minima."""

    grid: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown spectrum kind {self.kind!r}")
        values = np.asarray(self.values, dtype=float)
        # roundoff in the modulus-difference spectra can dip just below zero
        object.__setattr__(self, "values", np.maximum(values, 0.0))

    def at(self, theta) -> np.ndarray:
        """Linear interpolation of the curve at ``theta``."""
        return np.interp(theta, self.grid, self.values)


def local_minima(values: np.ndarray) -> np.ndarray:
    """Indices of interior local minima.

    A run of equal values counts once (at its left end) if both of its
    outer neighbours are larger.
    """
    v = np.asarray(values)
    starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    runs = v[starts]
    idx = np.flatnonzero((runs[1:-1] < runs[:-2]) & (runs[1:-1] < runs[2:])) + 1
    return starts[idx]


def peak_search(curve: SpectrumCurve, k: int) -> np.ndarray:
    """The ``k`` deepest minima of ``curve``, refined and sorted by angle.

    Each minimum is refined by fitting a parabola through log f at the
    minimum and its two neighbours; the vertex is kept within half a grid
    step. Equal depths resolve to the smaller angle.

    Raises:
        InsufficientPeaksError: if the curve has fewer than ``k`` minima.
    """
    grid, v = curve.grid, curve.values
    if grid.size < 3 or k < 1:
        raise DomainError("peak search needs >= 3 grid points and k >= 1")
    idx = local_minima(v)
    if idx.size < k:
        raise InsufficientPeaksError(idx.size, k)
    order = np.lexsort((grid[idx], v[idx]))
    chosen = idx[order[:k]]

    y = np.log(np.maximum(v, _LOG_FLOOR))
    out = np.empty(k)
    for n, i in enumerate(chosen):
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2.0 * y1 + y2
        offset = 0.5 * (y0 - y2) / denom if denom > 0 else 0.0
        offset = min(max(offset, -0.5), 0.5)
        step = grid[i + 1] - grid[i] if offset > 0 else grid[i] - grid[i - 1]
        out[n] = grid[i] + offset * step
    return np.sort(out)
