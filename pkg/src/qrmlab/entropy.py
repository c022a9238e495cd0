"""Von Neumann entropy, relative entropy, entropy production and fluxes.

Relative entropy uses the two-branch definition: finite when the kernel of the
second argument lies inside the kernel of the first, ``math.inf`` otherwise.
Infinity is a value here, never an overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import matops
from .errors import ContractError
from .matops import as_operator, dag

__all__ = [
    "von_neumann_entropy",
    "relative_entropy",
    "EpReport",
    "entropy_production",
    "ep_single",
]

# eigenvalues below KERNEL_TOL_FACTOR * max eigenvalue count as kernel
KERNEL_TOL_FACTOR = 1e-12


def _eigh_state(rho: np.ndarray, what: str):
    rho = as_operator(rho)
    if not matops.is_density_matrix(rho, tol=1e-8):
        raise ContractError(f"{what} must be a density matrix")
    w, v = np.linalg.eigh((rho + dag(rho)) / 2)
    return w, v


def von_neumann_entropy(rho: np.ndarray, kernel_tol: float | None = None) -> float:
    """-tr(rho ln rho) over eigenvalues above the kernel cutoff."""
    w, _ = _eigh_state(rho, "entropy argument")
    if kernel_tol is None:
        kernel_tol = KERNEL_TOL_FACTOR * max(w[-1], 1e-300)
    w = w[w > kernel_tol]
    return float(-np.sum(w * np.log(w)))


def relative_entropy(mu: np.ndarray, nu: np.ndarray, kernel_tol: float | None = None) -> float:
    """tr(mu (ln mu - ln nu)) when ker(nu) is contained in ker(mu), else inf."""
    wm, vm = _eigh_state(mu, "first relative entropy argument")
    wn, vn = _eigh_state(nu, "second relative entropy argument")
    if mu.shape != nu.shape:
        raise ContractError("relative entropy requires states of equal dimension")
    if kernel_tol is None:
        kernel_tol = KERNEL_TOL_FACTOR * max(wm[-1], wn[-1], 1e-300)

    mu = as_operator(mu)
    # weight of mu on each eigenvector of nu
    weights = np.real(np.einsum("ij,jk,ki->i", dag(vn), mu, vn))
    support_n = wn > kernel_tol
    if np.any(weights[~support_n] > kernel_tol):
        return math.inf

    wm_pos = wm[wm > kernel_tol]
    tr_mu_ln_mu = float(np.sum(wm_pos * np.log(wm_pos)))
    tr_mu_ln_nu = float(np.sum(weights[support_n] * np.log(wn[support_n])))
    return tr_mu_ln_mu - tr_mu_ln_nu


@dataclass(frozen=True)
class EpReport:
    """Entropy production of a state under a decomposed generator.

    ``per_reservoir[j]`` is sigma_j = tr(L_j(rho)(ln rho_j+ - ln rho));
    ``fluxes[j]`` is the flux observable value tr(rho L_j^dag(-ln rho_j+));
    ``balance_residual`` measures the entropy balance identity.
    """

    total: float
    per_reservoir: tuple
    fluxes: tuple
    balance_residual: float


def _ln_faithful(rho: np.ndarray, kernel_tol: float, what: str) -> np.ndarray:
    w, v = np.linalg.eigh((as_operator(rho) + dag(as_operator(rho))) / 2)
    if w[0] <= kernel_tol * max(w[-1], 1e-300):
        raise ContractError(f"{what} must be positive definite (min eigenvalue {w[0]:.3e})")
    return (v * np.log(w)) @ dag(v)


def entropy_production(
    generators: Sequence[Callable[[np.ndarray], np.ndarray]],
    rho: np.ndarray,
    steady_states: Sequence[np.ndarray],
    kernel_tol: float = KERNEL_TOL_FACTOR,
) -> EpReport:
    """Per-reservoir entropy production of ``rho`` for a sum of Lindbladians.

    ``generators[j]`` applies the j-th Lindbladian; ``steady_states[j]`` is its
    faithful steady state. The balance residual compares the analytic entropy
    derivative -tr(L(rho)(ln rho + I)) to production minus the flux terms.
    """
    if len(generators) != len(steady_states):
        raise ContractError("need one steady state per generator")
    rho = as_operator(rho)
    if not matops.is_density_matrix(rho, tol=1e-8):
        raise ContractError("entropy production requires a density matrix")
    ln_rho = _ln_faithful(rho, kernel_tol, "state")

    sigmas = []
    fluxes = []
    flux_into_sum = 0.0
    l_total = np.zeros_like(rho)
    for gen, rho_j in zip(generators, steady_states):
        ln_j = _ln_faithful(rho_j, kernel_tol, "individual steady state")
        lj = gen(rho)
        l_total = l_total + lj
        sigma_j = float(np.real(np.trace(lj @ (ln_j - ln_rho))))
        flux_into = float(np.real(np.trace(lj @ ln_j)))
        sigmas.append(sigma_j)
        fluxes.append(-flux_into)
        flux_into_sum += flux_into

    total = float(sum(sigmas))
    ident = np.eye(rho.shape[0], dtype=complex)
    ds_dt = float(np.real(-np.trace(l_total @ (ln_rho + ident))))
    balance_residual = abs(ds_dt - total + flux_into_sum)
    return EpReport(total, tuple(sigmas), tuple(fluxes), float(balance_residual))


def ep_single(
    apply_l: Callable[[np.ndarray], np.ndarray],
    rho: np.ndarray,
    rho_plus: np.ndarray,
    kernel_tol: float = KERNEL_TOL_FACTOR,
) -> float:
    """Entropy production tr(L(rho)(ln rho+ - ln rho)) for a single reservoir."""
    rho = as_operator(rho)
    ln_rho = _ln_faithful(rho, kernel_tol, "state")
    ln_plus = _ln_faithful(rho_plus, kernel_tol, "steady state")
    return float(np.real(np.trace(apply_l(rho) @ (ln_plus - ln_rho))))
