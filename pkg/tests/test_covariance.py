import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from ncdoa.array import UlaGeometry, steering_vector
from ncdoa.covariance import extended_covariance, sample_covariance, sample_covariances, sample_unconjugated
from ncdoa.errors import DomainError
from ncdoa.signals import Modulation, Scenario, SourceSpec, exact_covariances, synthesize_snapshots

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
snapshots = st.tuples(st.integers(1, 5), st.integers(1, 8)).flatmap(
    lambda s: st.tuples(arrays(float, s, elements=finite), arrays(float, s, elements=finite))
).map(lambda p: p[0] + 1j * p[1])


def loop_outer(x, conj):
    # one outer product per snapshot, summed in a python loop
    m, n = x.shape
    acc = np.zeros((m, m), complex)
    for t in range(n):
        col = x[:, t]
        acc += np.outer(col, col.conj() if conj else col)
    return acc / n


def test_rank_one_examples():
    x = np.array([[1.0], [1j]])
    assert_allclose(sample_covariance(x), [[1, -1j], [1j, 1]])
    assert_allclose(sample_unconjugated(x), [[1, 1j], [1j, -1]])


def test_empty_rejected():
    with pytest.raises(DomainError):
        sample_covariance(np.zeros((3, 0), complex))
    with pytest.raises(DomainError):
        extended_covariance(np.zeros(3, complex))


@settings(max_examples=50)
@given(snapshots)
def test_against_loop_oracle(x):
    assert_allclose(sample_covariance(x), loop_outer(x, True), atol=1e-9)
    assert_allclose(sample_unconjugated(x), loop_outer(x, False), atol=1e-9)
    y = np.vstack([x, x.conj()])
    assert_allclose(extended_covariance(x), loop_outer(y, True), atol=1e-9)


@settings(max_examples=50)
@given(snapshots)
def test_structure(x):
    r, rp, ry = sample_covariance(x), sample_unconjugated(x), extended_covariance(x)
    assert np.array_equal(r, r.conj().T)
    assert np.array_equal(rp, rp.T)
    assert np.linalg.eigvalsh(r).min() >= -1e-10 * max(1.0, np.abs(r).max())
    block = np.block([[r, rp], [rp.conj(), r.conj()]])
    assert np.max(np.abs(ry - block)) <= 1e-13


def test_column_order_irrelevant(fig2):
    x = synthesize_snapshots(fig2).data
    perm = np.random.default_rng(0).permutation(x.shape[1])
    assert_allclose(sample_covariance(x[:, perm]), sample_covariance(x), atol=1e-13)


def test_single_source_converges():
    n = 20_000
    sc = Scenario(UlaGeometry(4), [SourceSpec(70.0, Modulation.QPSK)], snr_db=math.inf, num_snapshots=n)
    r = sample_covariance(synthesize_snapshots(sc))
    a = steering_vector(sc.geometry, 70.0)
    assert np.linalg.norm(r - np.outer(a, a.conj())) <= 5 / math.sqrt(n)
    assert np.linalg.norm(sample_unconjugated(synthesize_snapshots(sc))) <= 5 * 4 / math.sqrt(n)


def test_bpsk_unconjugated_limit():
    n = 20_000
    sc = Scenario(UlaGeometry(4), [SourceSpec(70.0, Modulation.BPSK, nc_phase=40.0)],
                  snr_db=math.inf, num_snapshots=n)
    rp = sample_unconjugated(synthesize_snapshots(sc))
    # noiseless BPSK: s^2 = e^{j beta} exactly for every sample
    assert_allclose(rp, exact_covariances(sc).unconj, atol=1e-12)


def test_circular_extended_limit():
    # M = 1 circular source: R_y -> I
    n = 40_000
    rng = np.random.default_rng(5)
    s = np.exp(1j * (0.5 * np.pi * rng.integers(0, 4, n) + 0.25 * np.pi))
    assert_allclose(extended_covariance(s[None, :]), np.eye(2), atol=5 / math.sqrt(n))
    b = rng.choice([-1.0, 1.0], n)
    assert_allclose(extended_covariance(b[None, :]), np.ones((2, 2)), atol=1e-15)


@pytest.mark.slow
def test_asymptotic_consistency(fig2):
    exact = exact_covariances(fig2)
    wins = 0
    for seed in range(100):
        dist = []
        for n in (100, 10_000):
            cov = sample_covariances(synthesize_snapshots(replace(fig2, num_snapshots=n, seed=seed)))
            dist.append(np.linalg.norm(cov.extended - exact.extended))
        wins += dist[1] < dist[0]
    assert wins >= 95
