import numpy as np
import pytest
from hypothesis import strategies as st

from ncdoa.array import UlaGeometry, manifold
from ncdoa.harness import fig1_scenario, fig2_scenario
from ncdoa.signals import NCN, Modulation, Scenario, SourceSpec, exact_covariances
from ncdoa.spectrum import SearchGrid


@pytest.fixture(scope="session")
def fig2():
    return fig2_scenario(snr_db=10.0)


@pytest.fixture(scope="session")
def fig1():
    return fig1_scenario(snr_db=3.0)


@pytest.fixture(scope="session")
def fine_grid6():
    return SearchGrid.uniform(UlaGeometry(6), 0.01)


def true_ncn_parts(sc):
    """Population R and R' contributions of the common non-circular sources."""
    srcs = [s for s in sc.sources if s.signal_class == NCN]
    a = manifold(sc.geometry, [s.doa for s in srcs])
    p = np.array([s.power for s in srcs])
    c = np.array([s.nc_coefficient for s in srcs])
    return (a * p) @ a.conj().T, (a * (c * p)) @ a.T


LATTICE = 0.05


@st.composite
def random_scenarios(draw, min_m=4, max_m=10, max_extra=2):
    """Admissible scenarios with q <= M - max_extra and DOAs >= 5 deg apart in [30, 150].

    DOAs sit on the 0.05 deg lattice of the default search grid so that
    exact-covariance nulls are not blurred by grid quantization.
    """
    m = draw(st.integers(min_m, max_m))
    q = draw(st.integers(1, m - max_extra))
    kinds = draw(st.lists(st.sampled_from(["ncm", "ncn", "circ"]), min_size=q, max_size=q))
    if q >= 3 and draw(st.booleans()):
        kinds = draw(st.permutations(["ncm", "ncn", "circ"] + kinds[3:]))
    n_nc = sum(k != "circ" for k in kinds)
    ext = sum(1 if k == "ncm" else 2 for k in kinds)
    if n_nc > m - 1 or ext > 2 * m - 1:
        kinds = ["ncm"] * q  # always admissible for q <= M - 1
    start = LATTICE * draw(st.integers(600, 1200))
    slack = np.array(draw(st.lists(st.floats(0.0, 15.0), min_size=q - 1, max_size=q - 1)))
    room = 150.0 - start - 5.0 * (q - 1)
    slack = slack * min(1.0, room / max(slack.sum(), 1e-9))
    gaps = LATTICE * np.ceil((5.0 + slack) / LATTICE)
    doas = np.round((start + np.concatenate([[0.0], np.cumsum(gaps)])) / LATTICE) * LATTICE
    sources = []
    for k, doa in zip(kinds, doas):
        phase = draw(st.floats(0.0, 359.0))
        power = draw(st.floats(0.5, 2.0))
        if k == "ncm":
            sources.append(SourceSpec(float(doa), Modulation.BPSK, power, nc_phase=phase))
        elif k == "ncn":
            rate = draw(st.floats(0.2, 0.8))
            sources.append(SourceSpec(float(doa), Modulation.UQPSK, power, rate, phase))
        else:
            sources.append(SourceSpec(float(doa), Modulation.QPSK, power))
    snr = draw(st.sampled_from([0.0, 10.0, 20.0]))
    return Scenario(UlaGeometry(m), sources, snr_db=snr)


@pytest.fixture(scope="session")
def fig2_sweep():
    """The 100-trial fig2 sweep over {-5, 0, 5, 10, 15} dB, all three algorithms."""
    from ncdoa.harness import SweepConfig, run_sweep
    return run_sweep(SweepConfig(fig2_scenario(), num_trials=100, master_seed=2024))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
