"""Direction finding for coexisting circular and non-circular sources on a ULA."""

__version__ = "0.1.0"

from .array import UlaGeometry, manifold, steering_vector
from .covariance import (
    CovarianceSet,
    extended_covariance,
    sample_covariance,
    sample_covariances,
    sample_unconjugated,
)
from .errors import ConfigError, DomainError, InsufficientPeaksError, SingularManifoldError
from .estimators import DoaReport, SubspaceBundle, hrnc_music, music_spectrum, nc_music_spectrum
from .signals import (
    ClassCounts,
    Modulation,
    Scenario,
    SnapshotSet,
    SourceSpec,
    exact_covariances,
    generate_symbols,
    synthesize_snapshots,
)
from .spectrum import SearchGrid, SpectrumCurve, peak_search
from .harness import SweepConfig, fig1_scenario, fig2_scenario, run_sweep, run_trial
