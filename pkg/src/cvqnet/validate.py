"""Self-check suite run by ``cvqnet validate``.

Each check returns ``(passed, detail)``. ``break_symplectic`` swaps in a wrong
quadrature map so that the suite can be seen to fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import qfi
from .gaussian import (
    apply_loss,
    apply_phase_shifts,
    apply_symplectic,
    bsn_symplectic,
    classical_fisher_homodyne,
    make_input_state,
    purity_determinant,
    qfi_displacement,
    symplectic_form,
)
from .random_unitary import RngStream, sample_ginibre, sample_haar_unitary, unitarity_error, unitarize

DEFAULT_SEED = 20240917
DIMS = (2, 4, 8)
PER_DIM = 100
REL_TOL = 1e-8


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _broken_symplectic(U: np.ndarray) -> np.ndarray:
    A, B = U.real, U.imag
    return np.block([[A, B], [B, A]])


class _Suite:
    def __init__(self, seed: int, break_symplectic: bool):
        self.seed = seed
        self.symplectic: Callable = _broken_symplectic if break_symplectic else bsn_symplectic
        self.nets = {M: [sample_haar_unitary(M, RngStream(seed, 1000 * M + i)) for i in range(PER_DIM)] for M in DIMS}

    def probe(self, U, nbar, phases=None, eta=1.0):
        M = U.shape[0]
        if phases is None:
            phases = qfi.optimal_phases(U)
        state = apply_symplectic(make_input_state(M, nbar * M), self.symplectic(U))
        state = apply_phase_shifts(state, phases)
        return apply_loss(state, eta) if eta != 1.0 else state

    def all_nets(self):
        for M in DIMS:
            yield from self.nets[M]

    def unitarity(self):
        worst = max(unitarity_error(U) for U in self.all_nets())
        return worst <= 1e-10, f"max|U^dagger U - I| = {worst:.2e}"

    def gram_schmidt_matches_qr(self):
        worst = 0.0
        for M in DIMS:
            for i in range(20):
                stream = RngStream(self.seed, 50_000 + 100 * M + i)
                gs = unitarize(sample_ginibre(M, stream))
                worst = max(worst, float(np.max(np.abs(gs - sample_haar_unitary(M, stream)))))
        return worst <= 1e-10, f"max entry gap = {worst:.2e}"

    def symplectic_map(self):
        worst = 0.0
        for U in self.all_nets():
            S = self.symplectic(U)
            M = U.shape[0]
            J = symplectic_form(M)
            worst = max(worst, np.max(np.abs(S.T @ S - np.eye(2 * M))), np.max(np.abs(S @ J @ S.T - J)))
        return worst <= 1e-10, f"max orthogonality/symplecticity defect = {worst:.2e}"

    def cross_path(self):
        worst = 0.0
        for U in self.all_nets():
            closed = qfi.h_lo(U, 0.3)
            worst = max(worst, abs(qfi_displacement(self.probe(U, 0.3)) - closed) / closed)
        return worst <= REL_TOL, f"max relative gap = {worst:.2e}"

    def homodyne_optimal(self):
        worst = 0.0
        for U in self.all_nets():
            st = self.probe(U, 0.3)
            h = qfi_displacement(st)
            worst = max(worst, abs(classical_fisher_homodyne(st) - h) / h)
        return worst <= REL_TOL, f"max relative gap F vs H = {worst:.2e}"

    def homodyne_bounded(self):
        gen = RngStream(self.seed, 99).generator()
        worst = -np.inf
        for U in self.all_nets():
            st = self.probe(U, 0.3, phases=gen.uniform(-np.pi, np.pi, U.shape[0]))
            worst = max(worst, classical_fisher_homodyne(st) - qfi_displacement(st))
        return worst <= 1e-10, f"max(F - H) = {worst:.2e}"

    def loss_consistency(self):
        worst = 0.0
        for U in self.all_nets():
            for eta in (0.25, 0.5, 0.9, 1.0):
                closed = qfi.h_lossy(U, 0.3, eta)
                worst = max(worst, abs(qfi_displacement(self.probe(U, 0.3, eta=eta)) - closed) / closed)
        return worst <= REL_TOL, f"max relative gap = {worst:.2e}"

    def ordering_chain(self):
        bad = 0
        for U in self.all_nets():
            M = U.shape[0]
            lo, mo, mlo, mx = qfi.h_lo(U, 0.3), qfi.h_mo(U, 0.3), qfi.h_mlo(U, 0.3), qfi.h_max(M, 0.3)
            gmax = max(qfi.g_i(U, i, 0.3) for i in range(M))
            eps = 1e-9 * mx
            ok = 2 * M - eps <= lo <= mlo + eps and mlo <= mx + eps and mo <= mlo + eps and mo <= gmax + eps
            bad += not ok
        return bad == 0, f"{bad} violations"

    def haar_moments(self):
        M, n = 8, 5000
        u11 = np.empty(n)
        col = np.empty(n)
        for i in range(n):
            U = sample_haar_unitary(M, RngStream(self.seed, 200_000 + i))
            u11[i] = abs(U[0, 0]) ** 2
            col[i] = np.sum(np.abs(U[:, 0])) ** 2
        z1 = abs(u11.mean() - 1 / M) / (u11.std(ddof=1) / np.sqrt(n))
        z2 = abs(col.mean() - (1 + np.pi / 4 * (M - 1))) / (col.std(ddof=1) / np.sqrt(n))
        return max(z1, z2) <= 3.0, f"z-scores |U11|^2: {z1:.2f}, (sum|U_a1|)^2: {z2:.2f}"

    def purity(self):
        worst = 0.0
        for U in self.nets[8][:20]:
            worst = max(worst, abs(purity_determinant(self.probe(U, 0.3)) - 1.0))
        return worst <= 1e-8, f"max |det(2 Sigma) - 1| = {worst:.2e}"

    def xp_block(self):
        worst = max(float(np.max(np.abs(self.probe(U, 0.3).cov_xp))) for U in self.all_nets())
        return worst <= 1e-10, f"max |Sigma_xp| = {worst:.2e}"


CHECKS = (
    ("unitarity", "unitarity"),
    ("gram_schmidt_matches_qr", "gram_schmidt_matches_qr"),
    ("bsn_symplectic", "symplectic_map"),
    ("cross_path_h_lo", "cross_path"),
    ("homodyne_equals_qfi", "homodyne_optimal"),
    ("homodyne_below_qfi_random_phases", "homodyne_bounded"),
    ("loss_consistency", "loss_consistency"),
    ("ordering_chain", "ordering_chain"),
    ("haar_moments", "haar_moments"),
    ("purity_conservation", "purity"),
    ("xp_block_vanishes", "xp_block"),
)


def run_checks(seed: int = DEFAULT_SEED, break_symplectic: bool = False) -> list:
    suite = _Suite(seed, break_symplectic)
    results = []
    for name, method in CHECKS:
        try:
            passed, detail = getattr(suite, method)()
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results
