"""M-mode Gaussian states and the passive/noisy maps used for displacement sensing.

Conventions (used everywhere in the package):

* quadratures ``x = (a + a^dagger)/sqrt(2)``, ``p = (a - a^dagger)/(i sqrt(2))``,
  so the vacuum has variance 1/2 in every quadrature;
* block ordering ``(x_1, ..., x_M, p_1, ..., p_M)`` for the mean and covariance;
* the covariance is ``Sigma_ij = <{Q_i - mu_i, Q_j - mu_j}>/2``.

States are immutable: every transform returns a new :class:`GaussianState`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DimensionMismatchError, InvalidDimensionError, NonPhysicalCovarianceError
from .random_unitary import check_unitary

SYMMETRY_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.ndim != 1 or mean.size % 2 or mean.size == 0:
            raise DimensionMismatchError(f"mean must have even length 2M, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatchError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise NonPhysicalCovarianceError("state has non-finite moments")
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise NonPhysicalCovarianceError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def modes(self) -> int:
        return self.mean.size // 2

    @property
    def cov_xx(self) -> np.ndarray:
        M = self.modes
        return self.cov[:M, :M]

    @property
    def cov_xp(self) -> np.ndarray:
        M = self.modes
        return self.cov[:M, M:]

    @property
    def cov_pp(self) -> np.ndarray:
        M = self.modes
        return self.cov[M:, M:]


def _symmetrized(cov: np.ndarray) -> np.ndarray:
    return 0.5 * (cov + cov.T)


def vacuum(M: int) -> GaussianState:
    if M < 1:
        raise InvalidDimensionError(f"number of modes must be >= 1, got {M}")
    return GaussianState(np.zeros(2 * M), 0.5 * np.eye(2 * M))


def squeezing_parameter(mean_photons: float) -> float:
    """``r = arcsinh(sqrt(N))`` for a squeezed vacuum with ``N`` mean photons."""
    if mean_photons < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mean_photons}")
    return float(np.arcsinh(np.sqrt(mean_photons)))


def make_input_state(M: int, mean_photons: float, input_mode: int = 0) -> GaussianState:
    """Squeezed vacuum (squeezed along x) in ``input_mode``, vacuum elsewhere.

    ``input_mode`` is zero-based. The squeezed mode has x-variance
    ``exp(-2r)/2`` and p-variance ``exp(2r)/2``.
    """
    if M < 1:
        raise InvalidDimensionError(f"number of modes must be >= 1, got {M}")
    if not 0 <= input_mode < M:
        raise IndexError(f"input_mode {input_mode} out of range for {M} modes")
    r = squeezing_parameter(mean_photons)
    var = np.full(2 * M, 0.5)
    var[input_mode] = 0.5 * np.exp(-2 * r)
    var[M + input_mode] = 0.5 * np.exp(2 * r)
    return GaussianState(np.zeros(2 * M), np.diag(var))


def symplectic_form(M: int) -> np.ndarray:
    I = np.eye(M)
    Z = np.zeros((M, M))
    return np.block([[Z, I], [-I, Z]])


def bsn_symplectic(U: np.ndarray) -> np.ndarray:
    """Real ``2M x 2M`` quadrature map of the network ``a_i -> sum_j U_ij a_j``.

    ``x -> Re(U) x - Im(U) p`` and ``p -> Im(U) x + Re(U) p``.
    """
    U = check_unitary(U)
    A, B = U.real, U.imag
    return np.block([[A, -B], [B, A]])


def phase_symplectic(phases: np.ndarray) -> np.ndarray:
    """Block-ordered symplectic matrix of local phase shifts ``exp(i phi_j n_j)``."""
    c = np.diag(np.cos(phases))
    s = np.diag(np.sin(phases))
    return np.block([[c, -s], [s, c]])


def apply_symplectic(state: GaussianState, S: np.ndarray) -> GaussianState:
    S = np.asarray(S, dtype=float)
    if S.shape != state.cov.shape:
        raise DimensionMismatchError(f"symplectic shape {S.shape} does not match state of {state.modes} modes")
    return GaussianState(S @ state.mean, _symmetrized(S @ state.cov @ S.T))


def apply_bsn(state: GaussianState, U: np.ndarray) -> GaussianState:
    U = np.asarray(U)
    if U.shape != (state.modes, state.modes):
        raise DimensionMismatchError(f"network of shape {U.shape} applied to {state.modes}-mode state")
    return apply_symplectic(state, bsn_symplectic(U))


def apply_phase_shifts(state: GaussianState, phases: np.ndarray) -> GaussianState:
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (state.modes,):
        raise DimensionMismatchError(f"{phases.size} phases for a {state.modes}-mode state")
    return apply_symplectic(state, phase_symplectic(phases))


def apply_displacement(state: GaussianState, x: float) -> GaussianState:
    """Displace every x-quadrature by ``x`` (generator ``sum_j p_j``)."""
    M = state.modes
    shift = np.concatenate([np.full(M, float(x)), np.zeros(M)])
    return GaussianState(state.mean + shift, state.cov)


def apply_loss(state: GaussianState, eta: float) -> GaussianState:
    """Uniform pure-loss channel of transmittivity ``eta`` on every mode."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittivity must lie in [0, 1], got {eta}")
    n = state.cov.shape[0]
    cov = eta * state.cov + (1.0 - eta) * 0.5 * np.eye(n)
    return GaussianState(np.sqrt(eta) * state.mean, _symmetrized(cov))


def mean_photon_number(state: GaussianState) -> float:
    return float(0.5 * (np.trace(state.cov) + state.mean @ state.mean) - 0.5 * state.modes)


def purity_determinant(state: GaussianState) -> float:
    """``det(2 Sigma)``; equal to 1 for pure states."""
    return float(np.linalg.det(2.0 * state.cov))


def _pd_quadratic_form(matrix: np.ndarray, vec: np.ndarray, what: str) -> float:
    try:
        factor = cho_factor(matrix, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise NonPhysicalCovarianceError(f"{what} is not positive definite") from exc
    return float(vec @ cho_solve(factor, vec))


def displacement_derivative(M: int) -> np.ndarray:
    return np.concatenate([np.ones(M), np.zeros(M)])


def qfi_displacement(state: GaussianState) -> float:
    """QFI for a common x-displacement: ``dmu^T Sigma^-1 dmu`` with ``dmu = (1..1, 0..0)``."""
    return _pd_quadratic_form(state.cov, displacement_derivative(state.modes), "covariance matrix")


def classical_fisher_homodyne(state: GaussianState) -> float:
    """Fisher information of x-homodyne detection on every mode.

    The outcomes are normal with covariance ``Sigma_xx`` and mean derivative
    all-ones, so ``F = 1^T Sigma_xx^-1 1``.
    """
    return _pd_quadratic_form(state.cov_xx, np.ones(state.modes), "x-quadrature covariance block")
