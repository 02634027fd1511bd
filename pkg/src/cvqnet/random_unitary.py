"""Haar-random unitaries, local 2x2 gates and matrix diagnostics.

Every sampler accepts either an :class:`RngStream` (a fresh generator is
derived from it on each call, so repeated calls give identical draws) or an
already-running :class:`numpy.random.Generator` (draws continue the stream).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError, InvalidDimensionError, NonUnitaryError

UNITARITY_TOL = 1e-10
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(master_seed, stream_index)``.

    Sample ``i`` of an ensemble uses ``RngStream(seed, i)``, so its draws do not
    depend on how samples are split between workers.
    """

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_dim(M: int) -> int:
    if int(M) != M or M < 1:
        raise InvalidDimensionError(f"matrix dimension must be a positive integer, got {M!r}")
    return int(M)


def sample_ginibre(M: int, rng: RngLike, batch: tuple[int, ...] = ()) -> np.ndarray:
    """Draw an ``M x M`` matrix of i.i.d. standard complex normals.

    Each entry has ``E|z|^2 = 1`` (real and imaginary parts of variance 1/2).
    ``batch`` prepends extra axes for drawing many matrices at once.
    """
    M = _check_dim(M)
    gen = as_generator(rng)
    shape = tuple(batch) + (M, M)
    re = gen.standard_normal(shape)
    im = gen.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def unitarize(Z: np.ndarray) -> np.ndarray:
    """Gram-Schmidt orthonormalize the columns of ``Z`` in order.

    Column ``k`` of the result is ``Z[:, k]`` minus its projections on the
    previous output columns, normalised. A second projection pass is made per
    column to keep orthogonality at double precision.

    Raises
    ------
    DegenerateInputError
        If some projected column has norm below ``1e-12`` relative to the
        original column norm.
    """
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise DegenerateInputError("matrix has non-finite entries")
    M = Z.shape[0]
    Q = np.zeros_like(Z)
    for k in range(M):
        col = Z[:, k].copy()
        scale = np.linalg.norm(col)
        for _ in range(2):
            if k:
                col -= Q[:, :k] @ (Q[:, :k].conj().T @ col)
        norm = np.linalg.norm(col)
        if scale == 0.0 or norm < DEGENERACY_TOL * scale:
            raise DegenerateInputError(f"column {k} is linearly dependent on the previous columns")
        Q[:, k] = col / norm
    return Q


def _qr_haar(Z: np.ndarray) -> np.ndarray:
    # phase-fixed QR: R gets a positive diagonal, which reproduces Gram-Schmidt
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    return Q * (d / np.abs(d))[..., None, :]


def sample_haar_unitary(M: int, rng: RngLike) -> np.ndarray:
    """Sample an ``M x M`` unitary from the Haar measure.

    Uses a Ginibre draw followed by phase-fixed QR, which yields the same matrix
    as :func:`unitarize` applied to that draw (up to rounding).
    """
    return _qr_haar(sample_ginibre(M, rng))


def sample_haar_batch(n: int, M: int, rng: RngLike) -> np.ndarray:
    """``n`` independent Haar unitaries stacked along the first axis."""
    return _qr_haar(sample_ginibre(M, rng, batch=(n,)))


def sample_local_u2(rng: RngLike) -> np.ndarray:
    """Haar-random 2x2 unitary (a random lossless two-mode beam splitter)."""
    return sample_haar_unitary(2, rng)


def unitarity_error(U: np.ndarray) -> float:
    """Max-entry norm of ``U^dagger U - I``."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {U.shape}")
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def check_unitary(U: np.ndarray, tol: float = UNITARITY_TOL) -> np.ndarray:
    """Return ``U`` as a complex array, raising if it is not unitary within ``tol``."""
    U = np.asarray(U, dtype=complex)
    if not np.all(np.isfinite(U)):
        raise NonUnitaryError("matrix has non-finite entries")
    err = unitarity_error(U)
    if err > tol:
        raise NonUnitaryError(f"max|U^dagger U - I| = {err:.3e} exceeds unitarity tolerance {tol:g}")
    return U


def hs_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Hilbert-Schmidt distance ``sqrt(Tr[(A-B)^dagger (A-B)])``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise DimensionMismatchError(f"shape mismatch: {A.shape} vs {B.shape}")
    return float(np.linalg.norm(A - B))
