"""Monte Carlo trials, sweeps, metrics and result files."""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from .array import UlaGeometry
from .covariance import CovarianceSet, sample_covariances
from .errors import ConfigError, DomainError, InsufficientPeaksError, SingularManifoldError
from .estimators import hrnc_music, music_spectrum, nc_music_spectrum
from .signals import CIRC, NCM, NCN, Modulation, Scenario, SourceSpec, exact_covariances, synthesize_snapshots
from .spectrum import SearchGrid, SpectrumCurve, peak_search

ALGORITHMS = ("music", "nc_music", "hrnc")
SWEEP_HEADER = ("snr_db", "algorithm", "rmse_deg", "resolution_prob", "failed_trials")
SPECTRUM_HEADER = ("kind", "theta_deg", "value")


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".9g")


# ---------------------------------------------------------------- scenarios

def fig1_scenario(snr_db: float = 3.0, num_snapshots: int = 500, seed: int = 0) -> Scenario:
    """Five sources on a five-element array: BPSK 35/95, QPSK 40/125, UQPSK 135."""
    return Scenario(
        UlaGeometry(5, 0.5),
        [
            SourceSpec(35.0, Modulation.BPSK),
            SourceSpec(95.0, Modulation.BPSK),
            SourceSpec(40.0, Modulation.QPSK),
            SourceSpec(125.0, Modulation.QPSK),
            SourceSpec(135.0, Modulation.UQPSK, nc_rate=0.5),
        ],
        snr_db, num_snapshots, seed,
    )


def fig2_scenario(snr_db: float = 10.0, num_snapshots: int = 500, seed: int = 0) -> Scenario:
    """Four closely spaced sources of all three classes on a six-element array."""
    return Scenario(
        UlaGeometry(6, 0.5),
        [
            SourceSpec(35.0, Modulation.BPSK, nc_phase=10.0),
            SourceSpec(65.0, Modulation.BPSK, nc_phase=20.0),
            SourceSpec(75.0, Modulation.QPSK),
            SourceSpec(85.0, Modulation.UQPSK, nc_rate=0.5, nc_phase=40.0),
        ],
        snr_db, num_snapshots, seed,
    )


SCENARIOS = {"fig1": fig1_scenario, "fig2": fig2_scenario}


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "num_elements": sc.geometry.num_elements,
        "spacing": sc.geometry.spacing,
        "snr_db": sc.snr_db,
        "num_snapshots": sc.num_snapshots,
        "seed": sc.seed,
        "sources": [
            {"doa": s.doa, "modulation": s.modulation.value, "power": s.power,
             "nc_rate": s.nc_rate, "nc_phase": s.nc_phase}
            for s in sc.sources
        ],
    }


def scenario_from_dict(d: dict) -> Scenario:
    try:
        return Scenario(
            UlaGeometry(int(d["num_elements"]), float(d.get("spacing", 0.5))),
            [SourceSpec(**src) for src in d["sources"]],
            float(d.get("snr_db", 10.0)),
            int(d.get("num_snapshots", 500)),
            int(d.get("seed", 0)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad scenario description: {exc}") from None
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def load_scenario(ref) -> Scenario:
    """Scenario from a built-in name, a JSON file path or an already-parsed dict."""
    if isinstance(ref, Scenario):
        return ref
    if isinstance(ref, dict):
        return scenario_from_dict(ref)
    if ref in SCENARIOS:
        return SCENARIOS[ref]()
    try:
        with open(ref, encoding="utf-8") as fh:
            return scenario_from_dict(json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"unknown scenario {ref!r} (not a built-in name or a file)") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{ref}: {exc}") from None


# ---------------------------------------------------------------- trials

def normalize_algorithm(name: str) -> str:
    key = name.lower().replace("-", "_")
    if key not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return key


@dataclass
class TrialOutcome:
    """Signed errors (estimate - truth, degrees) aligned with ``scenario.doas``.

    ``errors`` is None when the estimator failed to produce a full set of
    peaks; ``failure`` then says why.
    """

    errors: Optional[np.ndarray]
    estimates: Optional[np.ndarray] = None
    failure: Optional[str] = None
    curves: Dict[str, SpectrumCurve] = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.errors is not None


def match_errors(estimates, truth) -> np.ndarray:
    """Signed errors under the one-to-one assignment minimising total absolute error."""
    est = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    cost = np.abs(est[:, None] - truth[None, :])
    rows, cols = linear_sum_assignment(cost)
    err = np.empty(truth.size)
    err[cols] = est[rows] - truth[cols]
    return err


def estimate(algorithm: str, cov: CovarianceSet, scenario: Scenario, grid: SearchGrid) -> TrialOutcome:
    """Run one estimator on ``cov`` and score it against the scenario's true DOAs."""
    algorithm = normalize_algorithm(algorithm)
    counts = scenario.counts
    truth = scenario.doas
    curves: Dict[str, SpectrumCurve] = {}
    try:
        if algorithm == "hrnc":
            report = hrnc_music(cov, counts, scenario.ncn_rates(), grid)
            curves = report.curves
            found = {NCM: report.ncm, NCN: report.ncn, CIRC: report.circ}
            errors = np.empty(truth.size)
            for cls, est in found.items():
                mask = np.array([s.signal_class == cls for s in scenario.sources])
                if mask.any():
                    errors[mask] = match_errors(est, truth[mask])
            return TrialOutcome(errors, truth + errors, curves=curves)
        if algorithm == "music":
            curve = music_spectrum(cov.conj, counts.q, grid)
        else:
            curve = nc_music_spectrum(cov.extended, counts, grid)
        curves = {curve.kind: curve}
        est = peak_search(curve, counts.q)
        errors = match_errors(est, truth)
        return TrialOutcome(errors, truth + errors, curves=curves)
    except (InsufficientPeaksError, SingularManifoldError) as exc:
        return TrialOutcome(None, failure=str(exc), curves=curves)


def trial_covariances(scenario: Scenario, exact: bool = False) -> CovarianceSet:
    if exact:
        return exact_covariances(scenario)
    return sample_covariances(synthesize_snapshots(scenario))


def run_trial(scenario: Scenario, algorithm: str, grid_step: float = 0.05,
              exact: bool = False) -> TrialOutcome:
    """Simulate one snapshot set for ``scenario`` and score ``algorithm`` on it."""
    grid = SearchGrid.uniform(scenario.geometry, grid_step)
    return estimate(algorithm, trial_covariances(scenario, exact), scenario, grid)


def rmse(errors) -> float:
    """Root-mean-square over all sources of all successful trials; NaN if none.

    ``errors`` is a sequence of per-trial error arrays or TrialOutcomes;
    failed trials (None) are skipped.
    """
    arrays = [getattr(e, "errors", e) for e in errors]
    arrays = [np.asarray(a, dtype=float) for a in arrays if a is not None]
    if not arrays:
        return math.nan
    flat = np.concatenate(arrays)
    return float(np.sqrt(np.mean(flat ** 2)))


def min_separation(doas) -> float:
    d = np.sort(np.asarray(doas, dtype=float))
    return float(np.min(np.diff(d))) if d.size > 1 else math.inf


def resolution_probability(outcomes: Sequence[TrialOutcome], threshold: float) -> float:
    """Fraction of trials with a full peak set and every |error| below ``threshold``."""
    if not outcomes:
        raise DomainError("need at least one trial")
    hits = sum(1 for o in outcomes if o.ok and np.all(np.abs(o.errors) < threshold))
    return hits / len(outcomes)


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepConfig:
    """Monte Carlo protocol: every algorithm sees the same snapshots in a trial."""

    scenario: Scenario
    snr_grid: Sequence[float] = (-5.0, 0.0, 5.0, 10.0, 15.0)
    num_trials: int = 100
    algorithms: Sequence[str] = ALGORITHMS
    master_seed: int = 0
    grid_step_deg: float = 0.05
    resolution_threshold_deg: Optional[float] = None
    emit_spectra: bool = False

    def __post_init__(self):
        if self.num_trials < 1:
            raise ConfigError("num_trials must be >= 1")
        if len(self.snr_grid) == 0:
            raise ConfigError("snr_grid must not be empty")
        if not self.grid_step_deg > 0:
            raise ConfigError("grid_step_deg must be positive")
        self.snr_grid = tuple(float(s) for s in self.snr_grid)
        self.algorithms = tuple(normalize_algorithm(a) for a in self.algorithms)

    @property
    def threshold(self) -> float:
        if self.resolution_threshold_deg is not None:
            return float(self.resolution_threshold_deg)
        return 0.5 * min_separation(self.scenario.doas)

    def to_dict(self) -> dict:
        sc = scenario_to_dict(self.scenario)
        for key in ("snr_db", "seed"):
            sc.pop(key)
        return {
            "scenario": sc,
            "snr_grid": list(self.snr_grid),
            "num_trials": self.num_trials,
            "algorithms": list(self.algorithms),
            "master_seed": self.master_seed,
            "grid_step_deg": self.grid_step_deg,
            "resolution_threshold_deg": self.resolution_threshold_deg,
            "emit_spectra": self.emit_spectra,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        if "config" in d and "scenario" not in d:
            d = d["config"]  # a run manifest
        d = dict(d)
        try:
            scenario = load_scenario(d.pop("scenario"))
        except KeyError:
            raise ConfigError("sweep config needs a 'scenario'") from None
        if "num_snapshots" in d:
            scenario = replace(scenario, num_snapshots=int(d.pop("num_snapshots")))
        known = {"snr_grid", "num_trials", "algorithms", "master_seed", "grid_step_deg",
                 "resolution_threshold_deg", "emit_spectra"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(scenario=scenario, **d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_config(path) -> SweepConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return SweepConfig.from_dict(data)


@dataclass
class SweepRow:
    snr_db: float
    algorithm: str
    rmse_deg: float
    resolution_prob: float
    failed_trials: int


@dataclass
class SweepResult:
    config: SweepConfig
    rows: List[SweepRow]
    outcomes: Dict[Tuple[float, str], List[TrialOutcome]] = field(repr=False)
    spectra: Dict[Tuple[float, str], Dict[str, SpectrumCurve]] = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        return self.config.hash()

    def row(self, snr_db: float, algorithm: str) -> SweepRow:
        for r in self.rows:
            if r.snr_db == snr_db and r.algorithm == algorithm:
                return r
        raise KeyError((snr_db, algorithm))


def trial_seed(master_seed: int, trial: int) -> int:
    """Per-trial seed; shared by every SNR so sweeps use common random numbers."""
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1, np.uint64)[0])


def _run_cell(config: SweepConfig, grid: SearchGrid, snr: float, trial: int):
    sc = replace(config.scenario, snr_db=snr, seed=trial_seed(config.master_seed, trial))
    cov = trial_covariances(sc)
    out = {}
    for algo in config.algorithms:
        o = estimate(algo, cov, sc, grid)
        if not (config.emit_spectra and trial == 0):
            o.curves = {}
        out[algo] = o
    return out


def run_sweep(config: SweepConfig, workers: int = 1) -> SweepResult:
    """Run ``num_trials`` trials at every SNR; results do not depend on ``workers``."""
    grid = SearchGrid.uniform(config.scenario.geometry, config.grid_step_deg)
    cells = [(snr, t) for snr in config.snr_grid for t in range(config.num_trials)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _run_cell(config, grid, *c), cells))
    else:
        results = [_run_cell(config, grid, *c) for c in cells]

    outcomes: Dict[Tuple[float, str], List[TrialOutcome]] = {}
    spectra: Dict[Tuple[float, str], Dict[str, SpectrumCurve]] = {}
    for (snr, t), res in zip(cells, results):
        for algo, o in res.items():
            outcomes.setdefault((snr, algo), []).append(o)
            if t == 0 and config.emit_spectra:
                spectra[(snr, algo)] = o.curves
    rows = []
    for snr in config.snr_grid:
        for algo in config.algorithms:
            outs = outcomes[(snr, algo)]
            rows.append(SweepRow(
                snr, algo, rmse(outs),
                resolution_probability(outs, config.threshold),
                sum(not o.ok for o in outs),
            ))
    return SweepResult(config, rows, outcomes, spectra)


# ---------------------------------------------------------------- output

def _write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_sweep_csv(path, rows: Sequence[SweepRow]) -> None:
    _write_csv(path, SWEEP_HEADER, [
        (_fmt(r.snr_db), r.algorithm, _fmt(r.rmse_deg), _fmt(r.resolution_prob), r.failed_trials)
        for r in rows
    ])


def write_spectrum_csv(path, curves) -> None:
    """One row per (curve, grid point); ``curves`` is an iterable of SpectrumCurve."""
    rows = []
    for c in curves:
        rows.extend((c.kind, _fmt(t), _fmt(v)) for t, v in zip(c.grid, c.values))
    _write_csv(path, SPECTRUM_HEADER, rows)


def write_manifest(path, config: SweepConfig, started: str, finished: str, **extra) -> None:
    manifest = {
        "config": config.to_dict(),
        "config_hash": config.hash(),
        "master_seed": config.master_seed,
        "version": __version__,
        "started_at": started,
        "finished_at": finished,
        **extra,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def emit_results(result: SweepResult, out_dir, started: Optional[str] = None) -> List[str]:
    """Write sweep.csv, manifest.json and (if captured) one spectrum CSV per SNR and algorithm."""
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, "sweep.csv"), os.path.join(out_dir, "manifest.json")]
    write_sweep_csv(paths[0], result.rows)
    for (snr, algo), curves in sorted(result.spectra.items()):
        if curves:
            p = os.path.join(out_dir, f"spectra_{algo}_snr{_fmt(snr)}.csv")
            write_spectrum_csv(p, curves.values())
            paths.append(p)
    now = utc_now()
    write_manifest(paths[1], result.config, started or now, now)
    return paths
