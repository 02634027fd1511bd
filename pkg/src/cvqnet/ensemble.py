"""Monte Carlo averages of the QFIs over Haar-random networks."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Optional, Sequence

import numpy as np

from . import qfi
from .parallel import mean_std, ordered_map
from .gaussian import apply_bsn, apply_loss, apply_phase_shifts, make_input_state, qfi_displacement
from .random_unitary import RngStream, sample_haar_unitary

DEFAULT_K_FRACTIONS = (0.25, 0.5, 0.75)


def lemma1_expectation(M: int, nbar: float, eta: float = 1.0) -> float:
    """Haar average of :func:`~cvqnet.qfi.h_lo`: ``2M + 4[(pi/4)(M-1) + 1] f_+(nbar M)``."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    return float(2 * M + 4 * (np.pi / 4 * (M - 1) + 1) * qfi.lossy_factor(nbar * M, eta))


def haar_network(M: int, seed: int, index: int) -> np.ndarray:
    return sample_haar_unitary(M, RngStream(seed, index))


def _sample_qfis(index: int, M: int, nbar: float, eta: float, seed: int) -> tuple:
    U = haar_network(M, seed, index)
    return (
        qfi.h_lo(U, nbar, eta),
        qfi.h_mo(U, nbar, eta),
        qfi.h_mlo(U, nbar, eta),
        qfi.g_i(U, 0, nbar),
    )


@dataclass
class EnsembleResult:
    M: int
    nbar: float
    eta: float
    samples: int
    seed: int
    mean_h_lo: float
    std_h_lo: float
    mean_h_mo: float
    std_h_mo: float
    mean_h_mlo: float
    std_h_mlo: float
    closed_form_mean: float
    tail_fractions: list = field(default_factory=list)
    values: dict = field(default_factory=dict, repr=False)

    def se(self, name: str) -> float:
        """Standard error of the mean of ``h_lo``, ``h_mo`` or ``h_mlo``."""
        return getattr(self, f"std_{name}") / np.sqrt(self.samples)


def _check_samples(samples: int, minimum: int = 2) -> None:
    if int(samples) != samples or samples < minimum:
        raise ValueError(f"sample count must be an integer >= {minimum}, got {samples}")


def mc_haar_qfi(
    M: int,
    nbar: float,
    eta: float = 1.0,
    samples: int = 2000,
    seed: int = 0,
    k_fractions: Sequence[float] = DEFAULT_K_FRACTIONS,
    threads: Optional[int] = None,
) -> EnsembleResult:
    """Sample ``samples`` Haar networks and aggregate ``h_lo``, ``h_mo``, ``h_mlo``.

    Sample ``i`` is drawn from ``RngStream(seed, i)``. Standard deviations use
    the ``ddof=1`` estimator. ``tail_fractions`` holds, for each ``c`` in
    ``k_fractions``, the pair ``(k, fraction)`` with ``k = c * 2 pi nbar`` and the
    empirical fraction of ``h_lo <= (2 pi nbar - k) M^2``; it is empty when
    ``nbar == 0``.
    """
    _check_samples(samples)
    qfi._check_eta(eta)
    rows = np.array(
        ordered_map(partial(_sample_qfis, M=M, nbar=nbar, eta=eta, seed=seed), samples, threads)
    )
    h_lo_v, h_mo_v, h_mlo_v, g1_v = rows.T
    m_lo, s_lo = mean_std(h_lo_v)
    m_mo, s_mo = mean_std(h_mo_v)
    m_mlo, s_mlo = mean_std(h_mlo_v)
    tails = []
    if nbar > 0:
        for c in k_fractions:
            k = c * 2 * np.pi * nbar
            tails.append((float(k), _tail_fraction(h_lo_v, M, nbar, k)))
    return EnsembleResult(
        M=M,
        nbar=float(nbar),
        eta=float(eta),
        samples=int(samples),
        seed=int(seed),
        mean_h_lo=m_lo,
        std_h_lo=s_lo,
        mean_h_mo=m_mo,
        std_h_mo=s_mo,
        mean_h_mlo=m_mlo,
        std_h_mlo=s_mlo,
        closed_form_mean=lemma1_expectation(M, nbar, eta),
        tail_fractions=tails,
        values={"h_lo": h_lo_v, "h_mo": h_mo_v, "h_mlo": h_mlo_v, "g_1": g1_v},
    )


def _check_k(k: float, nbar: float) -> None:
    if not 0.0 < k < 2 * np.pi * nbar:
        raise ValueError(f"k must satisfy 0 < k < 2*pi*nbar = {2 * np.pi * nbar:.6g}, got {k}")


def _tail_fraction(h_lo_values: np.ndarray, M: int, nbar: float, k: float) -> float:
    threshold = (2 * np.pi * nbar - k) * M ** 2
    return float(np.mean(h_lo_values <= threshold))


def _sample_h_lo(index: int, M: int, nbar: float, seed: int) -> float:
    return qfi.h_lo(haar_network(M, seed, index), nbar)


def concentration_fraction(
    M: int, nbar: float, k: float, samples: int, seed: int, threads: Optional[int] = None
) -> float:
    """Empirical probability that ``h_lo(U) <= (2 pi nbar - k) M^2`` for Haar ``U``."""
    _check_k(k, nbar)
    _check_samples(samples, minimum=1)
    h = np.array(ordered_map(partial(_sample_h_lo, M=M, nbar=nbar, seed=seed), samples, threads))
    return _tail_fraction(h, M, nbar, k)


@dataclass
class DecayPoint:
    M: int
    samples: int
    mean_h_mo_over_M2: float
    se_h_mo_over_M2: float
    mean_g1_over_M: float
    se_g1_over_M: float


def _sample_mo(index: int, M: int, nbar: float, seed: int) -> tuple:
    U = haar_network(M, seed, index)
    return qfi.h_mo(U, nbar), qfi.g_i(U, 0, nbar)


def theorem2_decay(
    M_list: Sequence[int], nbar: float, samples: int, seed: int, threads: Optional[int] = None
) -> list:
    """Ensemble means of ``h_mo / M^2`` and ``g_1 / M`` for each ``M`` in ``M_list``.

    Without local phases the QFI grows sub-quadratically, so ``h_mo / M^2``
    falls with ``M`` while ``g_1 / M`` stays near ``4 + 8 nbar``.
    """
    if not M_list:
        raise ValueError("M_list must be nonempty")
    _check_samples(samples)
    out = []
    for M in M_list:
        rows = np.array(ordered_map(partial(_sample_mo, M=M, nbar=nbar, seed=seed), samples, threads))
        m_mo, s_mo = mean_std(rows[:, 0] / M ** 2)
        m_g1, s_g1 = mean_std(rows[:, 1] / M)
        root = np.sqrt(samples)
        out.append(
            DecayPoint(
                M=int(M),
                samples=int(samples),
                mean_h_mo_over_M2=m_mo,
                se_h_mo_over_M2=s_mo / root,
                mean_g1_over_M=m_g1,
                se_g1_over_M=s_g1 / root,
            )
        )
    return out


def covariance_path_qfi(U: np.ndarray, nbar: float, eta: float = 1.0, phases: Optional[np.ndarray] = None) -> float:
    """QFI from the full Gaussian moments: squeeze mode 0, network, phases, loss.

    ``phases`` defaults to the optimal local phases for column 0.
    """
    M = U.shape[0]
    if phases is None:
        phases = qfi.optimal_phases(U, 0)
    state = make_input_state(M, nbar * M, 0)
    state = apply_phase_shifts(apply_bsn(state, U), phases)
    if eta != 1.0:
        state = apply_loss(state, eta)
    return qfi_displacement(state)


def _sample_loss(index: int, M: int, nbar: float, etas: tuple, seed: int) -> list:
    U = haar_network(M, seed, index)
    phases = qfi.optimal_phases(U, 0)
    out = []
    for eta in etas:
        closed = qfi.h_lo(U, nbar, eta)
        cov_path = covariance_path_qfi(U, nbar, eta, phases)
        out.append((closed, abs(closed - cov_path) / abs(closed)))
    return out


@dataclass
class LossPoint:
    M: int
    nbar: float
    eta: float
    samples: int
    mean_h_lo_lossy: float
    std_h_lo_lossy: float
    closed_form_mean: float
    closed_vs_covariance_max_rel_err: float
    beta_threshold_alpha_half: float


def loss_sweep(
    M: int, nbar: float, etas: Sequence[float], samples: int, seed: int, threads: Optional[int] = None
) -> list:
    """Lossy ``h_lo`` on a common set of Haar networks for every ``eta``.

    Each sample is evaluated both in closed form and through the covariance
    matrix after the loss channel; the worst relative gap is reported.
    """
    _check_samples(samples)
    etas = tuple(float(e) for e in etas)
    for e in etas:
        qfi._check_eta(e)
    per_sample = ordered_map(partial(_sample_loss, M=M, nbar=nbar, etas=etas, seed=seed), samples, threads)
    arr = np.array(per_sample)  # (samples, len(etas), 2)
    beta = qfi.loss_threshold_beta(0.5, nbar, M)
    out = []
    for j, eta in enumerate(etas):
        mean, std = mean_std(arr[:, j, 0])
        out.append(
            LossPoint(
                M=int(M),
                nbar=float(nbar),
                eta=eta,
                samples=int(samples),
                mean_h_lo_lossy=mean,
                std_h_lo_lossy=std,
                closed_form_mean=lemma1_expectation(M, nbar, eta),
                closed_vs_covariance_max_rel_err=float(np.max(arr[:, j, 1])),
                beta_threshold_alpha_half=beta,
            )
        )
    return out
