"""Reset-model Lindbladians on an unstructured Hilbert space.

The generator is ``L(rho) = -i[H, rho] + sum_j gamma_j (tau_j tr(rho) - rho)``.
All reset channels recombine into a single pair (Gamma, T), and the steady
state is the resolvent ``(i[H/Gamma, .] + 1)^{-1}(T)``, evaluated entrywise in
the eigenbasis of H.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import matops
from .errors import ContractError, VerificationError
from .matops import as_operator, commutator, dag

__all__ = [
    "ResetChannel",
    "QrmSystem",
    "Recombined",
    "recombine",
    "apply_generator",
    "steady_state",
    "propagate",
    "generator_spectrum",
    "rho_map",
    "choi_cptp_check",
    "adjoint_apply",
    "detailed_balance",
]


@dataclass(frozen=True)
class ResetChannel:
    """One reservoir: a reset density matrix and a positive rate."""

    tau: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "tau", as_operator(self.tau))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.gamma <= 0:
            raise ContractError(f"reset rate must be positive, got {self.gamma}")
        if not matops.is_density_matrix(self.tau, tol=1e-10):
            raise ContractError("reset state must be a density matrix")

    @property
    def dim(self) -> int:
        return self.tau.shape[0]


@dataclass(frozen=True)
class QrmSystem:
    """Hermitian Hamiltonian plus a nonempty list of reset channels."""

    h: np.ndarray
    channels: tuple

    def __post_init__(self):
        object.__setattr__(self, "h", as_operator(self.h))
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ContractError("a QRM needs at least one reset channel")
        if not matops.is_hermitian(self.h):
            raise ContractError("Hamiltonian must be Hermitian")
        for ch in self.channels:
            if ch.dim != self.dim:
                raise ContractError("channel dimension differs from Hamiltonian dimension")

    @property
    def dim(self) -> int:
        return self.h.shape[0]


@dataclass(frozen=True)
class Recombined:
    """Total rate Gamma and the rate-weighted mean reset state T."""

    gamma_total: float
    t: np.ndarray


def recombine(sys: QrmSystem) -> Recombined:
    gamma_total = sum(ch.gamma for ch in sys.channels)
    t = sum(ch.gamma * ch.tau for ch in sys.channels) / gamma_total
    return Recombined(float(gamma_total), t)


def apply_generator(sys: QrmSystem, rho: np.ndarray) -> np.ndarray:
    rho = as_operator(rho)
    rec = recombine(sys)
    return -1j * commutator(sys.h, rho) + rec.gamma_total * (rec.t * np.trace(rho) - rho)


def _eigenbasis(sys_h: np.ndarray):
    dec = matops.hermitian_spectral(sys_h)
    # per-column cluster-representative eigenvalue; degenerate pairs see an
    # exactly zero Bohr frequency
    cols = []
    evals = []
    for e, p in zip(dec.eigenvalues, dec.projectors):
        w, v = np.linalg.eigh(p)
        for k in range(len(w)):
            if w[k] > 0.5:
                cols.append(v[:, k])
                evals.append(e)
    v = np.array(cols).T
    return np.array(evals), v


def steady_state(sys: QrmSystem) -> np.ndarray:
    """Unique steady state via the resolvent formula in the eigenbasis of H."""
    rec = recombine(sys)
    e, v = _eigenbasis(sys.h)
    t_eig = dag(v) @ rec.t @ v
    bohr = e[:, None] - e[None, :]
    rho_eig = t_eig / (1j * bohr / rec.gamma_total + 1.0)
    rho = v @ rho_eig @ dag(v)
    rho = (rho + dag(rho)) / 2
    w, u = np.linalg.eigh(rho)
    w = np.where(w < -1e-12, 0.0, w)
    rho = (u * w) @ dag(u)
    return rho / np.trace(rho)


def propagate(sys: QrmSystem, rho0: np.ndarray, t: float) -> np.ndarray:
    """Exact evolution: entrywise decay toward the steady state in H's eigenbasis."""
    if t < 0:
        raise ContractError("propagation time must be nonnegative")
    rho0 = as_operator(rho0)
    rec = recombine(sys)
    rho_plus = steady_state(sys)
    e, v = _eigenbasis(sys.h)
    tr0 = np.trace(rho0)
    delta = dag(v) @ (rho0 - tr0 * rho_plus) @ v
    bohr = e[:, None] - e[None, :]
    decay = np.exp(-t * (1j * bohr + rec.gamma_total))
    return v @ (delta * decay) @ dag(v) + tr0 * rho_plus


def _expected_spectrum(sys: QrmSystem) -> np.ndarray:
    rec = recombine(sys)
    e = np.linalg.eigvalsh((sys.h + dag(sys.h)) / 2)
    d = sys.dim
    vals = [0.0 + 0.0j] + [-rec.gamma_total + 0.0j] * (d - 1)
    for j in range(d):
        for k in range(d):
            if j != k:
                vals.append(-rec.gamma_total - 1j * (e[j] - e[k]))
    return np.array(vals)


def generator_spectrum(sys: QrmSystem, tol: float = 1e-8) -> np.ndarray:
    """Eigenvalues of the vectorized generator, verified against the spectral law.

    The law is the multiset {0, -Gamma (d-1 fold), -Gamma - i(e_j - e_k)} over
    ordered pairs j != k; mismatch beyond ``tol`` raises.
    """
    sup = matops.vectorize_map(lambda x: apply_generator(sys, x), sys.dim)
    computed = sup.eigenvalues()
    expected = _expected_spectrum(sys)
    rec = recombine(sys)
    scale = max(rec.gamma_total, float(np.abs(expected).max()), 1.0)
    pool = list(computed)
    for ev in expected:
        dists = [abs(ev - c) for c in pool]
        k = int(np.argmin(dists))
        if dists[k] > tol * scale:
            raise VerificationError(
                f"generator spectrum violates the spectral law: "
                f"expected eigenvalue {ev:.6e} missing (nearest at distance {dists[k]:.3e})"
            )
        pool.pop(k)
    return computed


def rho_map(h: np.ndarray, t: np.ndarray) -> np.ndarray:
    """The CPTP resolvent map (i[H, .] + 1)^{-1} applied to T."""
    h = as_operator(h)
    t = as_operator(t)
    if not matops.is_hermitian(h):
        raise ContractError("rho_map requires a Hermitian H")
    e, v = _eigenbasis(h)
    t_eig = dag(v) @ t @ v
    bohr = e[:, None] - e[None, :]
    return v @ (t_eig / (1j * bohr + 1.0)) @ dag(v)


def choi_cptp_check(h: np.ndarray) -> dict:
    """Choi-matrix diagnostics of the resolvent map.

    Returns the smallest Choi eigenvalue (complete positivity requires >= 0 up
    to rounding) and the worst trace-preservation residual over matrix units.
    """
    h = as_operator(h)
    d = h.shape[0]
    choi = np.zeros((d * d, d * d), dtype=complex)
    basis = np.zeros((d, d), dtype=complex)
    max_tr_residual = 0.0
    for i in range(d):
        for j in range(d):
            basis[i, j] = 1.0
            out = rho_map(h, basis)
            choi += np.kron(basis, out)
            max_tr_residual = max(max_tr_residual, abs(np.trace(out) - (1.0 if i == j else 0.0)))
            basis[i, j] = 0.0
    choi = (choi + dag(choi)) / 2
    w = np.linalg.eigvalsh(choi)
    return {
        "min_choi_eigenvalue": float(w[0]),
        "trace_preservation_residual": float(max_tr_residual),
    }


def adjoint_apply(sys: QrmSystem, x: np.ndarray) -> np.ndarray:
    """Heisenberg-picture generator: i[H, X] + Gamma (I tr(T X) - X)."""
    x = as_operator(x)
    rec = recombine(sys)
    ident = np.eye(sys.dim, dtype=complex)
    return 1j * commutator(sys.h, x) + rec.gamma_total * (ident * np.trace(rec.t @ x) - x)


def detailed_balance(sys: QrmSystem, tol: float = 1e-10) -> bool:
    """Detailed balance holds iff [T, H] = 0 (for positive definite T)."""
    rec = recombine(sys)
    w = np.linalg.eigvalsh((rec.t + dag(rec.t)) / 2)
    if w[0] <= 0:
        raise ContractError("detailed balance test requires positive definite T")
    lhs = np.linalg.norm(commutator(rec.t, sys.h))
    scale = np.linalg.norm(rec.t) * np.linalg.norm(sys.h)
    return bool(lhs <= tol * max(scale, 1e-300))
