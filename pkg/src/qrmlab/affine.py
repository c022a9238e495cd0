"""Affine splitting of the Hamiltonian among reset channels.

Each channel carries a weight lambda_j; the split generators are
``L_j(rho) = -i[lambda_j H, rho] + gamma_j (tau_j tr(rho) - rho)`` and sum to
the full generator when the weights sum to one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import entropy, matops, qrm
from .errors import ContractError
from .matops import as_operator, commutator, dag
from .qrm import QrmSystem

__all__ = [
    "AffineSplit",
    "split_generator_apply",
    "split_steady_state",
    "sigma_components",
    "kappa",
    "rho_lambda",
    "lemma46_quantity",
    "fit_leading_exponent",
]


@dataclass(frozen=True)
class AffineSplit:
    """Weights distributing the Hamiltonian over the channels.

    Weights must sum to one unless ``db_mode`` deliberately relaxes the
    constraint for detailed-balance exploration sweeps.
    """

    lambdas: tuple
    db_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if not self.db_mode and abs(sum(self.lambdas) - 1.0) > 1e-12:
            raise ContractError(
                f"affine weights must sum to 1 (got {sum(self.lambdas)!r}); "
                "use db_mode=True to relax"
            )

    @classmethod
    def proportional(cls, sys: QrmSystem) -> "AffineSplit":
        """The natural convex combination lambda_j = gamma_j / Gamma."""
        gamma_total = sum(ch.gamma for ch in sys.channels)
        return cls(tuple(ch.gamma / gamma_total for ch in sys.channels))


def _check_split(sys: QrmSystem, split: AffineSplit):
    if len(split.lambdas) != len(sys.channels):
        raise ContractError("need one affine weight per channel")


def split_generator_apply(
    sys: QrmSystem, split: AffineSplit, j: int, rho: np.ndarray
) -> np.ndarray:
    _check_split(sys, split)
    rho = as_operator(rho)
    ch = sys.channels[j]
    lam = split.lambdas[j]
    return -1j * lam * commutator(sys.h, rho) + ch.gamma * (ch.tau * np.trace(rho) - rho)


def split_steady_state(sys: QrmSystem, split: AffineSplit, j: int) -> np.ndarray:
    """Steady state of channel j: gamma_j (i lambda_j [H,.] + gamma_j)^{-1}(tau_j)."""
    _check_split(sys, split)
    ch = sys.channels[j]
    w = np.linalg.eigvalsh((ch.tau + dag(ch.tau)) / 2)
    if w[0] <= 1e-12:
        raise ContractError("split steady state requires a positive definite reset state")
    return qrm.rho_map(split.lambdas[j] * sys.h / ch.gamma, ch.tau)


def sigma_components(sys: QrmSystem, split: AffineSplit) -> entropy.EpReport:
    """Per-channel entropy production of the full steady state under the split."""
    _check_split(sys, split)
    rho_plus = qrm.steady_state(sys)
    steady = [split_steady_state(sys, split, j) for j in range(len(sys.channels))]
    gens = [
        (lambda r, jj=j: split_generator_apply(sys, split, jj, r))
        for j in range(len(sys.channels))
    ]
    return entropy.entropy_production(gens, rho_plus, steady)


def _qubit_model_parameters(sys: QrmSystem, j: int):
    """Extract (epsilon, delta, t_j, gamma_j) from a single-qubit system with
    diagonal reset states and H = [[0, d/2], [d/2, e]]."""
    if sys.dim != 2:
        raise ContractError("kappa is defined for the single-qubit model only")
    h = sys.h
    if abs(h[0, 0]) > 1e-12 or abs(np.imag(h[0, 1])) > 1e-12:
        raise ContractError("kappa expects H = [[0, delta/2], [delta/2, epsilon]]")
    ch = sys.channels[j]
    if abs(ch.tau[0, 1]) > 1e-12 or abs(ch.tau[1, 0]) > 1e-12:
        raise ContractError("kappa expects a diagonal reset state")
    epsilon = float(np.real(h[1, 1]))
    delta = 2.0 * float(np.real(h[0, 1]))
    t_j = float(np.real(ch.tau[0, 0]))
    return epsilon, delta, t_j, ch.gamma


def kappa(sys: QrmSystem, split: AffineSplit, j: int) -> float:
    """Bloch-vector norm of the split steady state in the single-qubit model."""
    _check_split(sys, split)
    epsilon, delta, t_j, gamma_j = _qubit_model_parameters(sys, j)
    lam = split.lambdas[j]
    num = (epsilon**2 * lam**2 + gamma_j**2) * (1.0 - 2.0 * t_j) ** 2
    den = epsilon**2 * lam**2 + gamma_j**2 + lam**2 * delta**2
    return float(np.sqrt(num / den))


def rho_lambda(sys: QrmSystem, lam: float) -> np.ndarray:
    """(lambda i[H,.] + 1)^{-1}(T) for the recombined reset state T."""
    rec = qrm.recombine(sys)
    return qrm.rho_map(lam * sys.h, rec.t)


def lemma46_quantity(sys: QrmSystem, lam: float, mu: float) -> float:
    """S(rho(mu)) + S(rho(mu)|rho(lambda)) - S(rho(lambda)).

    The signed product with (1 - lambda/mu) is nonnegative; ``mu`` must be
    nonzero and T positive definite.
    """
    if mu == 0:
        raise ContractError("lemma46_quantity requires mu != 0")
    rec = qrm.recombine(sys)
    w = np.linalg.eigvalsh((rec.t + dag(rec.t)) / 2)
    if w[0] <= 0:
        raise ContractError("lemma46_quantity requires positive definite T")
    rho_mu = rho_lambda(sys, mu)
    rho_lam = rho_lambda(sys, lam)
    s_mu = entropy.von_neumann_entropy(rho_mu)
    s_lam = entropy.von_neumann_entropy(rho_lam)
    rel = entropy.relative_entropy(rho_mu, rho_lam)
    return s_mu + rel - s_lam


def fit_leading_exponent(offsets: Sequence[float], values: Sequence[float]) -> float:
    """Leading power-law exponent of values ~ C * offset^alpha by log-log fit.

    Used to confirm the quadratic vanishing of entropy production along slices
    through a zero; nonpositive inputs are rejected.
    """
    s = np.asarray(offsets, dtype=float)
    v = np.asarray(values, dtype=float)
    if np.any(s <= 0) or np.any(v <= 0):
        raise ContractError("exponent fit needs positive offsets and values")
    slope, _ = np.polyfit(np.log(s), np.log(v), 1)
    return float(slope)
