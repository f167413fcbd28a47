"""Sample conjugated, unconjugated and extended covariance estimates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class CovarianceSet:
    """R = E[x x^H], R' = E[x x^T] and R_y = E[y y^H] with y = [x; x*].

    ``num_snapshots`` is None for population (analytic) covariances.
    """

    conj: np.ndarray
    unconj: np.ndarray
    extended: np.ndarray
    num_snapshots: Optional[int] = None

    @property
    def num_elements(self) -> int:
        return self.conj.shape[0]


def extended_from_blocks(r: np.ndarray, r_prime: np.ndarray) -> np.ndarray:
    """Assemble [[R, R'], [R'*, R*]]."""
    return np.block([[r, r_prime], [r_prime.conj(), r.conj()]])


def _as_data(x) -> np.ndarray:
    data = getattr(x, "data", x)
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[1] == 0:
        raise DomainError("need an M x N snapshot matrix with N >= 1")
    return data


def sample_covariance(x) -> np.ndarray:
    """(1/N) sum_t x(t) x(t)^H, Hermitian-symmetrized.

    ``x`` is a SnapshotSet or a raw M x N array.
    """
    data = _as_data(x)
    r = data @ data.conj().T / data.shape[1]
    return 0.5 * (r + r.conj().T)


def sample_unconjugated(x) -> np.ndarray:
    """(1/N) sum_t x(t) x(t)^T, symmetrized."""
    data = _as_data(x)
    r = data @ data.T / data.shape[1]
    return 0.5 * (r + r.T)


def extended_covariance(x) -> np.ndarray:
    """(1/N) sum_t y(t) y(t)^H for y(t) = [x(t); x(t)*].

    Assembled from the two M x M estimates, which is algebraically the same
    sum and keeps the block structure exact.
    """
    return extended_from_blocks(sample_covariance(x), sample_unconjugated(x))


def sample_covariances(x) -> CovarianceSet:
    data = _as_data(x)
    r = sample_covariance(data)
    rp = sample_unconjugated(data)
    return CovarianceSet(r, rp, extended_from_blocks(r, rp), data.shape[1])
