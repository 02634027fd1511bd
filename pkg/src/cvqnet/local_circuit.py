"""Brickwork networks of local Haar-random beam splitters and depth sweeps.

Layer ``l`` (zero-based) couples mode pairs ``(0,1), (2,3), ...`` when ``l`` is
even and ``(1,2), (3,4), ...`` when ``l`` is odd; an unpaired edge mode is left
untouched (open boundary). Later layers multiply from the left, so the
network after ``D`` layers is ``L_{D-1} ... L_1 L_0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from typing import Optional, Sequence

import numpy as np

from . import qfi
from .errors import InvalidDimensionError
from .parallel import mean_std, ordered_map
from .random_unitary import RngStream, _qr_haar, sample_haar_batch

REUNITARIZE_EVERY = 512


@dataclass(frozen=True)
class BrickworkSpec:
    modes: int
    depth: int
    seed: int

    def __post_init__(self):
        if self.modes < 2:
            raise InvalidDimensionError(f"brickwork needs at least 2 modes, got {self.modes}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")


def apply_layer(U: np.ndarray, parity: int, gen: np.random.Generator) -> np.ndarray:
    """Left-multiply ``U`` by one brickwork layer of fresh Haar 2x2 gates."""
    M = U.shape[0]
    n = (M - parity) // 2
    if n == 0:
        return U
    gates = sample_haar_batch(n, 2, gen)
    lo, hi = parity, parity + 2 * n
    block = U[lo:hi].reshape(n, 2, M)
    out = U.copy()
    out[lo:hi] = np.einsum("kij,kjm->kim", gates, block).reshape(2 * n, M)
    return out


def _brickwork_snapshots(M: int, depths: Sequence[int], gen: np.random.Generator) -> dict:
    wanted = set(int(d) for d in depths)
    U = np.eye(M, dtype=complex)
    snaps = {}
    if 0 in wanted:
        snaps[0] = U.copy()
    for layer in range(max(wanted, default=0)):
        U = apply_layer(U, layer % 2, gen)
        if (layer + 1) % REUNITARIZE_EVERY == 0:
            U = _qr_haar(U)
        if layer + 1 in wanted:
            snaps[layer + 1] = U.copy()
    return snaps


def build_brickwork(spec: BrickworkSpec, stream_index: int = 0) -> np.ndarray:
    """Network unitary of ``spec.depth`` brickwork layers.

    Gates are drawn in layer order from ``RngStream(spec.seed, stream_index)``,
    so a circuit of depth ``D`` is a prefix of the same-stream circuit of any
    larger depth.
    """
    gen = RngStream(spec.seed, stream_index).generator()
    return _brickwork_snapshots(spec.modes, [spec.depth], gen)[spec.depth]


@dataclass
class DepthPoint:
    M: int
    nbar: float
    depth: int
    configs: int
    mean_h_lo_over_M2: float
    mean_h_mlo_over_M2: float
    std_h_lo_over_M2: float
    std_h_mlo_over_M2: float

    @property
    def depth_over_M2(self) -> float:
        return self.depth / self.M ** 2

    @property
    def se_h_lo_over_M2(self) -> float:
        return self.std_h_lo_over_M2 / np.sqrt(self.configs)

    @property
    def se_h_mlo_over_M2(self) -> float:
        return self.std_h_mlo_over_M2 / np.sqrt(self.configs)


def _config_qfis(index: int, M: int, nbar: float, depths: tuple, seed: int) -> list:
    snaps = _brickwork_snapshots(M, depths, RngStream(seed, index).generator())
    return [(qfi.h_lo(snaps[d], nbar), qfi.h_mlo(snaps[d], nbar)) for d in depths]


def depth_sweep(
    M: int,
    nbar: float,
    depths: Sequence[int],
    configs: int,
    seed: int,
    threads: Optional[int] = None,
) -> list:
    """Average ``h_lo / M^2`` and ``h_mlo / M^2`` over ``configs`` circuits per depth.

    Config ``c`` grows one circuit from ``RngStream(seed, c)`` and is evaluated at
    every requested depth along the way.
    """
    if M < 2:
        raise InvalidDimensionError(f"brickwork needs at least 2 modes, got {M}")
    if int(configs) != configs or configs < 2:
        raise ValueError(f"configs must be an integer >= 2, got {configs}")
    depths = tuple(sorted(set(int(d) for d in depths)))
    if not depths or depths[0] < 0:
        raise ValueError("depths must be a nonempty list of nonnegative integers")
    per_config = np.array(
        ordered_map(partial(_config_qfis, M=M, nbar=nbar, depths=depths, seed=seed), configs, threads)
    ) / M ** 2  # (configs, len(depths), 2)
    out = []
    for j, d in enumerate(depths):
        m_lo, s_lo = mean_std(per_config[:, j, 0])
        m_mlo, s_mlo = mean_std(per_config[:, j, 1])
        out.append(
            DepthPoint(
                M=int(M),
                nbar=float(nbar),
                depth=d,
                configs=int(configs),
                mean_h_lo_over_M2=m_lo,
                mean_h_mlo_over_M2=m_mlo,
                std_h_lo_over_M2=s_lo,
                std_h_mlo_over_M2=s_mlo,
            )
        )
    return out


def depth_grid(M: int, points: int = 12, lo: float = 0.01, hi: float = 2.0, include_zero: bool = True) -> list:
    """Integer depths geometrically spaced in ``D / M^2`` over ``[lo, hi]``."""
    ratios = np.geomspace(lo, hi, points)
    depths = sorted(set(max(1, int(round(r * M * M))) for r in ratios))
    return ([0] if include_zero else []) + depths
