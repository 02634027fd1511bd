"""Closed-form QFI expressions for a squeezed vacuum sent through a network ``U``.

All functions take the per-mode photon number ``nbar``; the squeezed mode
carries ``N = nbar * M`` photons. Mode and column indices are zero-based.

Photon loss of transmittivity ``eta`` enters only through the replacement
``f_+(N) -> eta f_+(N) / (2 (1 - eta) f_+(N) + 1)`` (see :func:`lossy_factor`).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionMismatchError
from .random_unitary import check_unitary

ZERO_AMPLITUDE = 1e-14


def _nonneg(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError(f"{name} requires x >= 0, got {x}")
    return x


def f_plus(x):
    """Anti-squeezed variance offset ``x + sqrt(x^2 + x)``."""
    x = _nonneg(x, "f_plus")
    out = x + np.sqrt(x * x + x)
    return float(out) if out.ndim == 0 else out


def f_minus(x):
    """Squeezed variance offset ``x - sqrt(x^2 + x)`` (never positive)."""
    x = _nonneg(x, "f_minus")
    fp = x + np.sqrt(x * x + x)
    # -x / f_plus(x) avoids the cancellation in x - sqrt(x^2 + x)
    out = np.divide(-x, fp, out=np.zeros_like(x), where=fp > 0)
    return float(out) if out.ndim == 0 else out


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittivity eta must lie in [0, 1], got {eta}")


def lossy_factor(total_photons: float, eta: float = 1.0) -> float:
    """Effective ``f_+`` after uniform loss; equals ``f_plus(N)`` exactly at ``eta = 1``."""
    _check_eta(eta)
    fp = f_plus(total_photons)
    return eta * fp / (2.0 * (1.0 - eta) * fp + 1.0)


def _unitary(U) -> np.ndarray:
    return check_unitary(U)


def _check_nbar(nbar: float) -> None:
    if nbar < 0:
        raise ValueError(f"mean photon number per mode must be >= 0, got {nbar}")


def canonical_phase(phi: np.ndarray) -> np.ndarray:
    """Wrap angles into ``(-pi, pi]``."""
    phi = np.mod(np.asarray(phi, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(phi <= -np.pi, phi + 2 * np.pi, phi)


def optimal_phases(U: np.ndarray, input_mode: int = 0) -> np.ndarray:
    """Local phases with ``exp(i phi_a) = conj(U_ab) / |U_ab|`` for column ``b = input_mode``.

    Rows with ``|U_ab| < 1e-14`` get phase 0.
    """
    U = _unitary(U)
    col = U[:, input_mode]
    phi = canonical_phase(-np.angle(col))
    return np.where(np.abs(col) < ZERO_AMPLITUDE, 0.0, phi)


def qfi_phase(U: np.ndarray, phases: np.ndarray, nbar: float) -> float:
    """QFI for input mode 0 and arbitrary local phases."""
    U = _unitary(U)
    _check_nbar(nbar)
    M = U.shape[0]
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (M,):
        raise DimensionMismatchError(f"{phases.size} phases for a {M}-mode network")
    s = np.sum(np.exp(1j * phases) * U[:, 0])
    N = nbar * M
    return float(2 * M + 4 * (s.real ** 2 * f_plus(N) + s.imag ** 2 * f_minus(N)))


def h_lo(U: np.ndarray, nbar: float, eta: float = 1.0) -> float:
    """Local-phase-optimised QFI with the squeezed vacuum in mode 0."""
    U = _unitary(U)
    _check_nbar(nbar)
    M = U.shape[0]
    s = np.sum(np.abs(U[:, 0]))
    return float(2 * M + 4 * s ** 2 * lossy_factor(nbar * M, eta))


def h_lossy(U: np.ndarray, nbar: float, eta: float) -> float:
    return h_lo(U, nbar, eta)


def h_max(M: int, nbar: float, eta: float = 1.0) -> float:
    """Largest QFI over all networks (attained by balanced ones)."""
    _check_nbar(nbar)
    return float(2 * M + 4 * M * lossy_factor(nbar * M, eta))


def column_abs_sums(U: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(U), axis=0)


def column_sums_abs2(U: np.ndarray) -> np.ndarray:
    return np.abs(np.sum(U, axis=0)) ** 2


def h_mo(U: np.ndarray, nbar: float, eta: float = 1.0) -> float:
    """QFI without local phases, squeezed vacuum in the best input mode.

    The squeezing direction of the input is taken aligned with the column sum,
    which gives ``2M + 4 |sum_a U_ab|^2 f_+``.
    """
    U = _unitary(U)
    _check_nbar(nbar)
    M = U.shape[0]
    w = np.max(column_sums_abs2(U))
    return float(2 * M + 4 * w * lossy_factor(nbar * M, eta))


def h_mlo(U: np.ndarray, nbar: float, eta: float = 1.0) -> float:
    """QFI optimised over both the input mode and local phases."""
    U = _unitary(U)
    _check_nbar(nbar)
    M = U.shape[0]
    s = np.max(column_abs_sums(U))
    return float(2 * M + 4 * s ** 2 * lossy_factor(nbar * M, eta))


def best_input_mode(weights: np.ndarray) -> int:
    # np.argmax returns the first maximum, i.e. the smallest index among ties
    return int(np.argmax(weights))


def loss_threshold_beta(alpha: float, nbar: float, M: int) -> float:
    """Tolerable loss rate ``(1 - alpha) / (1 + 2 f_+(nbar M))``.

    For ``1 - eta <= beta`` the lossy QFI keeps at least a fraction ``alpha`` of
    the Heisenberg term.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _check_nbar(nbar)
    return float((1.0 - alpha) / (1.0 + 2.0 * f_plus(nbar * M)))


def g_i(U: np.ndarray, i: int, nbar: float) -> float:
    """Linear-in-N surrogate ``4M + 8N |sum_a U_ai|^2`` that upper-bounds the phase-free QFI."""
    U = _unitary(U)
    M = U.shape[0]
    if not 0 <= i < M:
        raise IndexError(f"column index {i} out of range for {M} modes")
    return float(4 * M + 8 * nbar * M * abs(np.sum(U[:, i])) ** 2)


def h_proper_squeezed(U: np.ndarray, phases: np.ndarray, allocation: np.ndarray) -> float:
    """QFI for a product of suitably oriented squeezed vacua.

    ``allocation[b]`` is the mean photon number placed in input mode ``b``.
    """
    U = _unitary(U)
    M = U.shape[0]
    phases = np.asarray(phases, dtype=float)
    allocation = np.asarray(allocation, dtype=float)
    if phases.shape != (M,) or allocation.shape != (M,):
        raise DimensionMismatchError("phases and allocation must both have one entry per mode")
    if np.any(allocation < 0):
        raise ValueError("photon allocation must be nonnegative")
    w = np.abs(np.exp(1j * phases) @ U) ** 2
    return float(2 * M + 4 * np.sum(w * f_plus(allocation)))


def h_global_bound(U: np.ndarray, phases: np.ndarray, total_photons: float) -> float:
    """Upper bound ``2M + 4M f_+(p_max N)`` over photon allocations for fixed ``U``, phases.

    ``p_max = max_b |sum_a exp(i phi_a) U_ab|^2 / M``.
    """
    U = _unitary(U)
    M = U.shape[0]
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (M,):
        raise DimensionMismatchError(f"{phases.size} phases for a {M}-mode network")
    if total_photons < 0:
        raise ValueError("total photon number must be >= 0")
    p = np.max(np.abs(np.exp(1j * phases) @ U) ** 2) / M
    p = min(p, 1.0)
    return float(2 * M + 4 * M * f_plus(p * total_photons))


def lipschitz_bound(M: int, nbar: float, eta: float = 1.0) -> float:
    """Bound ``8 M f_+(nbar M)`` on the Lipschitz constant of :func:`h_lo` (HS metric)."""
    _check_nbar(nbar)
    return float(8 * M * lossy_factor(nbar * M, eta))


@dataclass
class QfiBreakdown:
    M: int
    nbar: float
    h_lo: float
    h_mo: float
    h_mlo: float
    h_max: float
    optimal_phases: np.ndarray
    column_abs_sums: np.ndarray
    column_sums_abs2: np.ndarray

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("optimal_phases", "column_abs_sums", "column_sums_abs2"):
            d[key] = [float(v) for v in d[key]]
        return d


def qfi_breakdown(U: np.ndarray, nbar: float) -> QfiBreakdown:
    U = _unitary(U)
    M = U.shape[0]
    return QfiBreakdown(
        M=M,
        nbar=float(nbar),
        h_lo=h_lo(U, nbar),
        h_mo=h_mo(U, nbar),
        h_mlo=h_mlo(U, nbar),
        h_max=h_max(M, nbar),
        optimal_phases=optimal_phases(U, 0),
        column_abs_sums=column_abs_sums(U),
        column_sums_abs2=column_sums_abs2(U),
    )
