"""Source models, symbol generation and array snapshot synthesis."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .array import UlaGeometry, check_doa, manifold
from .covariance import CovarianceSet, extended_from_blocks
from .errors import DomainError


class Modulation(str, enum.Enum):
    BPSK = "BPSK"
    QPSK = "QPSK"
    UQPSK = "UQPSK"


# signal class tags used throughout: maximal non-circular, common
# non-circular, circular
NCM, NCN, CIRC = "ncm", "ncn", "circ"
_CLASS_OF = {Modulation.BPSK: NCM, Modulation.UQPSK: NCN, Modulation.QPSK: CIRC}


@dataclass(frozen=True)
class SourceSpec:
    """One narrowband emitter.

    ``nc_rate`` defaults from the modulation (BPSK 1, QPSK 0) and must be
    given explicitly, strictly inside (0, 1), for UQPSK. ``nc_phase`` is in
    degrees.
    """

    doa: float
    modulation: Modulation = Modulation.QPSK
    power: float = 1.0
    nc_rate: Optional[float] = None
    nc_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "doa", float(check_doa(self.doa)))
        try:
            mod = self.modulation
            if not isinstance(mod, Modulation):
                mod = Modulation(str(mod).upper())
        except ValueError:
            raise DomainError(f"unknown modulation {self.modulation!r}") from None
        object.__setattr__(self, "modulation", mod)
        if not self.power > 0:
            raise DomainError(f"power must be positive, got {self.power}")
        forced = {Modulation.BPSK: 1.0, Modulation.QPSK: 0.0}.get(mod)
        rate = self.nc_rate
        if forced is not None:
            if rate is not None and rate != forced:
                raise DomainError(f"{mod.value} has non-circularity rate {forced}, got {rate}")
            rate = forced
        elif rate is None or not 0.0 < rate < 1.0:
            raise DomainError(f"UQPSK needs a non-circularity rate in (0, 1), got {rate}")
        object.__setattr__(self, "nc_rate", float(rate))
        object.__setattr__(self, "nc_phase", float(self.nc_phase) % 360.0)

    @property
    def signal_class(self) -> str:
        return _CLASS_OF[self.modulation]

    @property
    def nc_coefficient(self) -> complex:
        """E[s^2] / E[|s|^2] = rho * exp(j beta)."""
        return self.nc_rate * np.exp(1j * np.deg2rad(self.nc_phase))


@dataclass(frozen=True)
class ClassCounts:
    """Number of maximal non-circular, common non-circular and circular sources."""

    q_ncm: int = 0
    q_ncn: int = 0
    q_c: int = 0

    def __post_init__(self):
        if min(self.q_ncm, self.q_ncn, self.q_c) < 0 or self.q < 1:
            raise DomainError(f"invalid class counts {self}")

    @property
    def q(self) -> int:
        return self.q_ncm + self.q_ncn + self.q_c

    @property
    def q_nc(self) -> int:
        return self.q_ncm + self.q_ncn

    @property
    def extended_rank(self) -> int:
        """Signal-space dimension of the extended covariance."""
        return self.q_ncm + 2 * self.q_ncn + 2 * self.q_c

    @property
    def differenced_rank(self) -> int:
        """Signal-space dimension once the common non-circular part is removed."""
        return self.q_ncm + 2 * self.q_c

    def validate(self, num_elements: int) -> "ClassCounts":
        m = num_elements
        if self.q_nc > m - 1:
            raise DomainError(f"q_ncm + q_ncn = {self.q_nc} exceeds M - 1 = {m - 1}")
        if self.extended_rank > 2 * m - 1:
            raise DomainError(
                f"extended signal dimension {self.extended_rank} leaves no noise space for M = {m}"
            )
        return self


@dataclass(frozen=True)
class Scenario:
    """Array, sources and acquisition settings for one simulated experiment.

    Sources are stored sorted by DOA so that results do not depend on the
    order they were listed in. ``snr_db = inf`` disables noise.
    """

    geometry: UlaGeometry
    sources: Sequence[SourceSpec]
    snr_db: float = 10.0
    num_snapshots: int = 500
    seed: int = 0

    def __post_init__(self):
        srcs = tuple(sorted(self.sources, key=lambda s: s.doa))
        if not srcs:
            raise DomainError("scenario needs at least one source")
        object.__setattr__(self, "sources", srcs)
        if int(self.num_snapshots) != self.num_snapshots or self.num_snapshots < 1:
            raise DomainError(f"num_snapshots must be >= 1, got {self.num_snapshots}")
        manifold(self.geometry, self.doas)
        self.counts.validate(self.geometry.num_elements)

    @property
    def doas(self) -> np.ndarray:
        return np.array([s.doa for s in self.sources])

    @property
    def counts(self) -> ClassCounts:
        classes = [s.signal_class for s in self.sources]
        return ClassCounts(classes.count(NCM), classes.count(NCN), classes.count(CIRC))

    @property
    def noise_power(self) -> float:
        """Per-sensor noise variance; unit-power sources sit at ``snr_db``."""
        return 0.0 if math.isinf(self.snr_db) and self.snr_db > 0 else 10.0 ** (-self.snr_db / 10.0)

    def doas_of(self, cls: str) -> np.ndarray:
        return np.array([s.doa for s in self.sources if s.signal_class == cls])

    def ncn_rates(self) -> np.ndarray:
        """Non-circularity rates of the common non-circular sources, by ascending DOA."""
        return np.array([s.nc_rate for s in self.sources if s.signal_class == NCN])


@dataclass(frozen=True)
class SnapshotSet:
    """Array output X (M x N), the symbols S (q x N) that produced it and the noise level."""

    data: np.ndarray
    symbols: np.ndarray
    scenario: Scenario = field(repr=False)


def role_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent counter-based stream for one role (source i, noise) of one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def generate_symbols(spec: SourceSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` unit-power-scaled symbols with E[s^2] = rho e^{j beta} E[|s|^2]."""
    amp = math.sqrt(spec.power)
    rot = np.exp(0.5j * np.deg2rad(spec.nc_phase))
    if spec.modulation is Modulation.BPSK:
        return amp * rot * rng.choice([-1.0, 1.0], size=n)
    if spec.modulation is Modulation.QPSK:
        k = rng.integers(0, 4, size=n)
        return amp * np.exp(1j * (0.5 * np.pi * k + 0.25 * np.pi))
    # UQPSK: unequal-amplitude quadrature BPSK pair, alpha^2 - gamma^2 = rho
    alpha = math.sqrt((1.0 + spec.nc_rate) / 2.0)
    gamma = math.sqrt((1.0 - spec.nc_rate) / 2.0)
    i = rng.choice([-1.0, 1.0], size=n)
    q = rng.choice([-1.0, 1.0], size=n)
    return amp * rot * (alpha * i + 1j * gamma * q)


_NOISE_ROLE = 1
_SOURCE_ROLE = 0


def synthesize_snapshots(scenario: Scenario, noise: bool = True) -> SnapshotSet:
    """x(t) = A s(t) + n(t) with circular white Gaussian noise; deterministic in ``scenario.seed``."""
    n = scenario.num_snapshots
    a = manifold(scenario.geometry, scenario.doas)
    s = np.stack(
        [generate_symbols(src, n, role_rng(scenario.seed, _SOURCE_ROLE, i))
         for i, src in enumerate(scenario.sources)]
    )
    x = a @ s
    var = scenario.noise_power if noise else 0.0
    if var > 0:
        rng = role_rng(scenario.seed, _NOISE_ROLE)
        shape = (scenario.geometry.num_elements, n)
        x = x + math.sqrt(var / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return SnapshotSet(x, s, scenario)


def population_covariances(a, powers, nc_coefs, noise_power) -> CovarianceSet:
    """Analytic R = A Rs A^H + s2 I, R' = A P B Rs A^T and R_y for uncorrelated sources."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    powers = np.asarray(powers, dtype=float)
    nc_coefs = np.asarray(nc_coefs, dtype=complex)
    r = (a * powers) @ a.conj().T + noise_power * np.eye(a.shape[0])
    rp = (a * (nc_coefs * powers)) @ a.T
    r = 0.5 * (r + r.conj().T)
    rp = 0.5 * (rp + rp.T)
    return CovarianceSet(r, rp, extended_from_blocks(r, rp))


def exact_covariances(scenario: Scenario) -> CovarianceSet:
    """Infinite-snapshot covariances of ``scenario``."""
    return population_covariances(
        manifold(scenario.geometry, scenario.doas),
        [s.power for s in scenario.sources],
        [s.nc_coefficient for s in scenario.sources],
        scenario.noise_power,
    )
