"""Subspace decompositions and pseudo-spectra for mixed circular/non-circular sources.

The HRNC-MUSIC pipeline runs in three passes over the covariance set:

1. the noise space of R' R'^H locates every non-circular source (coarsely);
2. that noise space joined with the top block of the extended noise space
   isolates the common non-circular sources, which are then refined,
   reconstructed and subtracted from R_y;
3. the differenced extended covariance yields the circular sources and,
   with a penalty that suppresses circular nulls, the maximal non-circular
   ones.

MUSIC and NC-MUSIC baselines share the same grid and peak search.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from .array import manifold
from .errors import DomainError, InsufficientPeaksError, SingularManifoldError
from .signals import ClassCounts
from .spectrum import SearchGrid, SpectrumCurve, peak_search

PINV_RCOND = 1e-10
MIN_MANIFOLD_SV = 1e-8


@dataclass
class SubspaceBundle:
    """Noise-space bases produced by one HRNC-MUSIC run.

    ``u_n1``/``u_n2`` (and the barred pair) are the top and bottom M rows
    of a 2M-dimensional orthonormal basis; the blocks themselves are not
    orthonormal. Missing entries belong to skipped stages.
    """

    q_n1: Optional[np.ndarray] = None
    u_n1: Optional[np.ndarray] = None
    u_n2: Optional[np.ndarray] = None
    w11: Optional[np.ndarray] = None
    ubar_n1: Optional[np.ndarray] = None
    ubar_n2: Optional[np.ndarray] = None


@dataclass
class DoaReport:
    """Estimated DOAs (degrees, ascending) grouped by signal class."""

    ncm: np.ndarray
    ncn: np.ndarray
    circ: np.ndarray
    preliminary_nc: np.ndarray
    curves: Dict[str, SpectrumCurve] = field(default_factory=dict)
    bundle: SubspaceBundle = field(default_factory=SubspaceBundle)

    def by_class(self) -> Dict[str, np.ndarray]:
        return {"ncm": self.ncm, "ncn": self.ncn, "circ": self.circ}


def _quadratic(basis: np.ndarray, steering: np.ndarray) -> np.ndarray:
    """a^H B B^H a for every column a of ``steering``."""
    return np.sum(np.abs(basis.conj().T @ steering) ** 2, axis=0)


def _check_square(r: np.ndarray, size: int, name: str) -> np.ndarray:
    r = np.asarray(r)
    if r.shape != (size, size):
        raise DomainError(f"{name} must be {size}x{size}, got {r.shape}")
    return r


def noise_space(r: np.ndarray, signal_dim: int) -> np.ndarray:
    """Eigenvectors of Hermitian ``r`` for all but its ``signal_dim`` largest eigenvalues."""
    n = r.shape[0]
    if not 0 <= signal_dim < n:
        raise DomainError(f"signal dimension {signal_dim} leaves no noise space in {n} dims")
    _, vecs = np.linalg.eigh(0.5 * (r + r.conj().T))
    return vecs[:, : n - signal_dim]


def nc_noise_subspace(r_prime: np.ndarray, counts: ClassCounts) -> np.ndarray:
    """Q_N1: left singular vectors of R' R'^H for its M - q_ncm - q_ncn smallest singular values."""
    r_prime = np.asarray(r_prime)
    m = r_prime.shape[0]
    _check_square(r_prime, m, "R'")
    if counts.q_nc == 0:
        raise DomainError("no non-circular sources: the preliminary stage does not apply")
    if counts.q_nc > m - 1:
        raise DomainError(f"q_ncm + q_ncn = {counts.q_nc} must be <= M - 1 = {m - 1}")
    u, _, _ = np.linalg.svd(r_prime @ r_prime.conj().T)
    return u[:, counts.q_nc:]


def spectrum_nc(q_n1: np.ndarray, grid: SearchGrid) -> SpectrumCurve:
    return SpectrumCurve(grid.angles, _quadratic(q_n1, grid.steering), "nc_preliminary")


def split_noise_subspace(r_y: np.ndarray, signal_dim: int):
    """Noise space of a 2M x 2M extended matrix, split into top and bottom M rows."""
    r_y = np.asarray(r_y)
    if r_y.ndim != 2 or r_y.shape[0] != r_y.shape[1] or r_y.shape[0] % 2:
        raise DomainError(f"extended matrix must be 2M x 2M, got {r_y.shape}")
    m = r_y.shape[0] // 2
    u = noise_space(r_y, signal_dim)
    return u[:m], u[m:]


def extended_noise_subspace(r_y: np.ndarray, counts: ClassCounts):
    """(U_N1, U_N2) with 2M - q_ncm - 2 q_ncn - 2 q_c columns each."""
    return split_noise_subspace(r_y, counts.extended_rank)


def w_dimension(m: int, counts: ClassCounts) -> int:
    cols = 3 * m - 2 * counts.q_ncm - 3 * counts.q_ncn - 2 * counts.q_c
    return min(cols, m - counts.q_ncn)


def build_w11(q_n1: np.ndarray, u_n1: np.ndarray, counts: ClassCounts) -> np.ndarray:
    """W_11: the w dominant left singular vectors of W = [Q_N1, U_N1]."""
    if counts.q_ncn == 0:
        raise DomainError("no common non-circular sources: W_11 is undefined")
    m = q_n1.shape[0]
    if q_n1.shape[1] != m - counts.q_nc or u_n1.shape != (m, 2 * m - counts.extended_rank):
        raise DomainError(
            f"subspace shapes {q_n1.shape}, {u_n1.shape} disagree with {counts} for M = {m}"
        )
    w = w_dimension(m, counts)
    if w < 1:
        raise DomainError(f"W_11 would have {w} columns")
    big_w = np.hstack([q_n1, u_n1])
    left, _, _ = np.linalg.svd(big_w)
    return left[:, :w]


def spectrum_ncn(w11: np.ndarray, grid: SearchGrid) -> SpectrumCurve:
    if w11.shape[1] == 0:
        raise DomainError("W_11 has no columns")
    return SpectrumCurve(grid.angles, _quadratic(w11, grid.steering), "ncn")


def recover_ncn_covariances(r_prime, a_hat_nc, counts: ClassCounts, p_ncn):
    """Rebuild the common non-circular part of R and R' from a reconstructed manifold.

    ``a_hat_nc`` holds the q_ncm maximal then the q_ncn common non-circular
    steering vectors. Returns ``(r_ncn, r_prime_ncn)``.
    """
    a_hat_nc = np.asarray(a_hat_nc)
    if a_hat_nc.shape[1] != counts.q_nc or counts.q_ncn == 0:
        raise DomainError(f"manifold has {a_hat_nc.shape[1]} columns, counts {counts}")
    rates = np.asarray(p_ncn)
    if rates.ndim == 2:
        rates = np.diag(rates)
    rates = rates.astype(float)
    if rates.shape != (counts.q_ncn,) or np.any(rates <= 0) or np.any(rates >= 1):
        raise DomainError(f"need {counts.q_ncn} non-circularity rates in (0, 1), got {p_ncn}")
    if np.linalg.svd(a_hat_nc, compute_uv=False)[-1] <= MIN_MANIFOLD_SV:
        raise SingularManifoldError("reconstructed non-circular manifold is rank deficient")

    g = np.linalg.pinv(a_hat_nc, rcond=PINV_RCOND) @ r_prime @ np.linalg.pinv(a_hat_nc.T, rcond=PINV_RCOND)
    r4 = g[counts.q_ncm:, counts.q_ncm:]
    powers = np.abs(np.diag(r4) / rates)
    a_ncn = a_hat_nc[:, counts.q_ncm:]
    r_ncn = (a_ncn * powers) @ a_ncn.conj().T
    r_prime_ncn = a_ncn @ r4 @ a_ncn.T
    return r_ncn, r_prime_ncn


def spatial_differencing(r_y, r_ncn, r_prime_ncn) -> np.ndarray:
    """R_y minus the extended-covariance image of (r_ncn, r_prime_ncn), Hermitian-symmetrized."""
    m = r_ncn.shape[0]
    _check_square(r_y, 2 * m, "R_y")
    _check_square(r_prime_ncn, m, "R'_ncn")
    tilde = np.block([[r_ncn, r_prime_ncn], [r_prime_ncn.conj(), r_ncn.conj()]])
    d = r_y - tilde
    return 0.5 * (d + d.conj().T)


def circular_spectrum(ubar_n1: np.ndarray, grid: SearchGrid) -> SpectrumCurve:
    return SpectrumCurve(grid.angles, _quadratic(ubar_n1, grid.steering), "circular")


def _nc_music_values(u1, u2, a) -> np.ndarray:
    # a^H U1 U1^H a - |a^T U2 U1^H a|
    p1 = u1.conj().T @ a
    p2 = u2.T @ a
    return np.sum(np.abs(p1) ** 2, axis=0) - np.abs(np.sum(p2 * p1, axis=0))


def ncm_spectrum(ubar_n1, ubar_n2, q_n1, grid: SearchGrid) -> SpectrumCurve:
    """Maximal non-circular spectrum with the Q_N1 term penalising circular directions."""
    if ubar_n1.shape != ubar_n2.shape or q_n1.shape[0] != ubar_n1.shape[0]:
        raise DomainError("inconsistent subspace shapes")
    a = grid.steering
    values = _nc_music_values(ubar_n1, ubar_n2, a) + _quadratic(q_n1, a)
    return SpectrumCurve(grid.angles, values, "ncm")


def music_spectrum(r: np.ndarray, q: int, grid: SearchGrid) -> SpectrumCurve:
    """Classical MUSIC denominator from the M - q weakest eigenvectors of R."""
    m = r.shape[0]
    if not 1 <= q <= m - 1:
        raise DomainError(f"MUSIC resolves 1..{m - 1} sources with M = {m}, asked for {q}")
    e_n = noise_space(r, q)
    return SpectrumCurve(grid.angles, _quadratic(e_n, grid.steering), "music")


def nc_music_spectrum(r_y: np.ndarray, counts: ClassCounts, grid: SearchGrid) -> SpectrumCurve:
    """NC-MUSIC baseline: the modulus-difference spectrum on R_y without differencing."""
    u1, u2 = extended_noise_subspace(r_y, counts)
    return SpectrumCurve(grid.angles, _nc_music_values(u1, u2, grid.steering), "nc_music")


def assign_preliminary(preliminary: Sequence[float], ncn: Sequence[float]) -> np.ndarray:
    """Drop the preliminary peak nearest to each refined common-NC DOA; return the rest.

    Pairs are consumed greedily by distance; equal distances go to the
    smaller preliminary angle.
    """
    prelim = list(np.sort(preliminary))
    pairs = sorted(
        (abs(p - c), p, i, j) for i, p in enumerate(prelim) for j, c in enumerate(ncn)
    )
    used_p, used_c = set(), set()
    for _, _, i, j in pairs:
        if i in used_p or j in used_c:
            continue
        used_p.add(i)
        used_c.add(j)
    return np.array([p for i, p in enumerate(prelim) if i not in used_p])


def _peaks(curve: SpectrumCurve, k: int, stage: str) -> np.ndarray:
    try:
        return peak_search(curve, k)
    except InsufficientPeaksError as exc:
        raise InsufficientPeaksError(exc.found, exc.requested, stage) from None


def hrnc_music(cov, counts: ClassCounts, p_ncn, grid: SearchGrid) -> DoaReport:
    """Run the three-pass estimator on a covariance set.

    ``p_ncn`` gives the known non-circularity rates of the common
    non-circular sources, matched to their estimates in ascending angle
    order.

    Raises:
        InsufficientPeaksError: a stage found too few minima (``stage`` set).
        SingularManifoldError: preliminary and refined DOAs collapsed.
    """
    m = cov.conj.shape[0]
    counts.validate(m)
    if grid.geometry.num_elements != m:
        raise DomainError("grid geometry does not match covariance size")
    empty = np.empty(0)
    bundle = SubspaceBundle()
    curves: Dict[str, SpectrumCurve] = {}
    prelim, ncn, ncm_coarse = empty, empty, empty

    if counts.q_nc:
        bundle.q_n1 = nc_noise_subspace(cov.unconj, counts)
        curves["nc_preliminary"] = spectrum_nc(bundle.q_n1, grid)
        prelim = _peaks(curves["nc_preliminary"], counts.q_nc, "nc_preliminary")
        ncm_coarse = prelim

    r_diff = cov.extended
    if counts.q_ncn:
        bundle.u_n1, bundle.u_n2 = extended_noise_subspace(cov.extended, counts)
        bundle.w11 = build_w11(bundle.q_n1, bundle.u_n1, counts)
        curves["ncn"] = spectrum_ncn(bundle.w11, grid)
        ncn = _peaks(curves["ncn"], counts.q_ncn, "ncn")
        ncm_coarse = assign_preliminary(prelim, ncn)
        try:
            a_hat = manifold(grid.geometry, np.concatenate([ncm_coarse, ncn]))
        except DomainError as exc:
            raise SingularManifoldError(f"stage 'differencing': {exc}") from None
        r_ncn, rp_ncn = recover_ncn_covariances(cov.unconj, a_hat, counts, p_ncn)
        r_diff = spatial_differencing(cov.extended, r_ncn, rp_ncn)

    bundle.ubar_n1, bundle.ubar_n2 = split_noise_subspace(r_diff, counts.differenced_rank)
    circ = empty
    if counts.q_c:
        curves["circular"] = circular_spectrum(bundle.ubar_n1, grid)
        circ = _peaks(curves["circular"], counts.q_c, "circular")
    ncm = empty
    if counts.q_ncm:
        curves["ncm"] = ncm_spectrum(bundle.ubar_n1, bundle.ubar_n2, bundle.q_n1, grid)
        ncm = _peaks(curves["ncm"], counts.q_ncm, "ncm")
    return DoaReport(ncm, ncn, circ, prelim, curves, bundle)
