"""Uniform linear array geometry, steering vectors and manifold matrices.

Angles are in degrees, measured from the array axis, and must lie strictly
inside (0, 180). The inter-element phase is ``2*pi*spacing*cos(theta)`` so
that every angle in that interval maps to a distinct steering vector when
``spacing <= 0.5``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class UlaGeometry:
    """M-element uniform linear array with spacing given in wavelengths."""

    num_elements: int
    spacing: float = 0.5

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise DomainError(f"num_elements must be an integer >= 2, got {self.num_elements}")
        if not self.spacing > 0:
            raise DomainError(f"spacing must be positive, got {self.spacing}")


def check_doa(theta) -> np.ndarray:
    """Return ``theta`` as a float array, raising if any angle is outside (0, 180)."""
    arr = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 180.0):
        raise DomainError(f"DOA must lie strictly inside (0, 180) degrees, got {theta}")
    return arr


def phase_step(geom: UlaGeometry, theta) -> np.ndarray:
    """Inter-element phase increment in radians for angle(s) ``theta`` (degrees)."""
    return 2.0 * np.pi * geom.spacing * np.cos(np.deg2rad(theta))


def steering_matrix(geom: UlaGeometry, thetas) -> np.ndarray:
    """Unchecked M x len(thetas) steering matrix; used for search grids."""
    m = np.arange(geom.num_elements)[:, None]
    return np.exp(1j * m * phase_step(geom, np.atleast_1d(thetas))[None, :])


def steering_vector(geom: UlaGeometry, theta: float) -> np.ndarray:
    """Steering vector a(theta) of length M with a[0] == 1."""
    theta = check_doa(theta)
    if theta.ndim != 0:
        raise DomainError("steering_vector takes a single angle; use manifold()")
    return steering_matrix(geom, theta)[:, 0]


def manifold(geom: UlaGeometry, thetas) -> np.ndarray:
    """Manifold matrix whose i-th column is the steering vector of ``thetas[i]``.

    Raises:
        DomainError: if an angle is out of range or two angles coincide.
    """
    thetas = np.atleast_1d(check_doa(thetas))
    if thetas.ndim != 1 or thetas.size == 0:
        raise DomainError("manifold needs a non-empty 1-D list of angles")
    if np.unique(thetas).size != thetas.size:
        raise DomainError(f"duplicate angles give a rank-deficient manifold: {thetas.tolist()}")
    return steering_matrix(geom, thetas)
