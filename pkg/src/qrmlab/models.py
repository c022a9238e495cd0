"""Reference models: a driven qubit with diagonal reset states, and a chain of
three qubits reset at both ends.

The closed-form matrices here are literal transcriptions kept as oracles; the
production path always goes through the generic machinery, and tests compare
the two entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matops, tripartite
from .errors import ContractError
from .matops import kron, kron_all
from .qrm import QrmSystem, ResetChannel
from .tripartite import TripartiteQrm

__all__ = [
    "SingleQubitParams",
    "ThreeQubitParams",
    "build_single_qubit",
    "single_qubit_steady_state",
    "single_qubit_split_steady_state",
    "single_qubit_sigma_j",
    "single_qubit_ep_delta0",
    "build_three_qubit",
    "three_qubit_commutator_h_rho0",
    "three_qubit_rho0_c",
    "three_qubit_rho1",
    "three_qubit_fluxes",
    "three_qubit_flux_leading_order",
]


def _check_population(t: float, name: str):
    if not (0.0 < t < 1.0) or t == 0.5:
        raise ContractError(f"{name} must lie in (0,1) and differ from 1/2, got {t}")


@dataclass(frozen=True)
class SingleQubitParams:
    """Qubit with bare energy epsilon, tunneling delta/2, and diagonal reset
    states diag(t_j, 1-t_j) at rates gamma_j.

    Channels with gamma_j = 0 model absent reservoirs and are dropped when the
    system is built. ``lambdas`` optionally fixes the affine weights (zero-rate
    channels must carry zero weight).
    """

    epsilon: float
    delta: float
    t: tuple
    gamma: tuple
    lambdas: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "gamma", tuple(float(v) for v in self.gamma))
        if self.lambdas is not None:
            object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if len(self.t) != len(self.gamma):
            raise ContractError("need one population per rate")
        if not self.t:
            raise ContractError("need at least one reservoir")
        for i, (t_j, g_j) in enumerate(zip(self.t, self.gamma)):
            _check_population(t_j, f"t[{i}]")
            if g_j < 0:
                raise ContractError(f"gamma[{i}] must be nonnegative")
        if all(g == 0 for g in self.gamma):
            raise ContractError("at least one rate must be positive")
        if self.lambdas is not None:
            if len(self.lambdas) != len(self.t):
                raise ContractError("need one affine weight per reservoir")
            for lam, g_j in zip(self.lambdas, self.gamma):
                if g_j == 0 and lam != 0:
                    raise ContractError("a dropped (zero-rate) channel cannot carry weight")

    @property
    def hamiltonian(self) -> np.ndarray:
        return np.array(
            [[0.0, self.delta / 2.0], [self.delta / 2.0, self.epsilon]], dtype=complex
        )

    def active(self) -> list[int]:
        return [j for j, g in enumerate(self.gamma) if g > 0]

    def active_lambdas(self) -> tuple:
        if self.lambdas is not None:
            return tuple(self.lambdas[j] for j in self.active())
        gam = [self.gamma[j] for j in self.active()]
        total = sum(gam)
        return tuple(g / total for g in gam)


def _tau(t: float) -> np.ndarray:
    return np.diag([t, 1.0 - t]).astype(complex)


def build_single_qubit(p: SingleQubitParams) -> QrmSystem:
    channels = [ResetChannel(_tau(p.t[j]), p.gamma[j]) for j in p.active()]
    return QrmSystem(p.hamiltonian, tuple(channels))


def single_qubit_steady_state(p: SingleQubitParams) -> np.ndarray:
    """Closed-form steady state with total rate Gamma and mean population t_bar."""
    idx = p.active()
    gam = np.array([p.gamma[j] for j in idx])
    ts = np.array([p.t[j] for j in idx])
    big_gamma = gam.sum()
    t_bar = float(np.dot(gam, ts) / big_gamma)
    eps, delta = p.epsilon, p.delta
    den = eps**2 + delta**2 + big_gamma**2
    p00 = ((eps**2 + big_gamma**2) * t_bar + delta**2 / 2) / den
    off = delta / 2 * (eps - 1j * big_gamma) * (1 - 2 * t_bar) / den
    return np.array([[p00, off], [np.conj(off), 1 - p00]], dtype=complex)


def single_qubit_split_steady_state(p: SingleQubitParams, j: int) -> np.ndarray:
    """Closed-form steady state of one split channel at weight lambda_j."""
    idx = p.active()
    lam = p.active_lambdas()[idx.index(j)] if j in idx else None
    if lam is None:
        raise ContractError(f"reservoir {j} has zero rate")
    g_j = p.gamma[j]
    t_j = p.t[j]
    eps, delta = p.epsilon, p.delta
    den = g_j**2 + lam**2 * (eps**2 + delta**2)
    p00 = (g_j**2 * t_j + lam**2 * (eps**2 * t_j + delta**2 / 2)) / den
    off = lam * delta / 2 * (eps * lam - 1j * g_j) * (1 - 2 * t_j) / den
    return np.array([[p00, off], [np.conj(off), 1 - p00]], dtype=complex)


def single_qubit_sigma_j(p: SingleQubitParams, j: int) -> float:
    """Closed-form individual entropy production when all reset states agree.

    Valid only for identical populations; the prefactor carries
    gamma_j*(gamma_j - lambda_j*Gamma)^2, which vanishes exactly at the
    proportional weights.
    """
    idx = p.active()
    ts = [p.t[k] for k in idx]
    if max(ts) - min(ts) > 1e-12:
        raise ContractError("closed-form sigma_j requires identical reset states")
    lams = p.active_lambdas()
    pos = idx.index(j)
    lam = lams[pos]
    g_j = p.gamma[j]
    t_j = p.t[j]
    eps, delta = p.epsilon, p.delta
    big_gamma = sum(p.gamma[k] for k in idx)
    kap = np.sqrt(
        (eps**2 * lam**2 + g_j**2)
        * (1 - 2 * t_j) ** 2
        / (eps**2 * lam**2 + g_j**2 + lam**2 * delta**2)
    )
    if kap >= 1.0:
        raise ContractError("kappa must be < 1 for a faithful split steady state")
    num = (
        g_j
        * (g_j - lam * big_gamma) ** 2
        * kap
        * (delta**2 / 2)
        * (np.log(1 + kap) - np.log(1 - kap))
    )
    den = (eps**2 * lam**2 + g_j**2) * (eps**2 + big_gamma**2 + delta**2)
    return float(num / den)


def single_qubit_ep_delta0(p: SingleQubitParams, p00_initial: float, time: float) -> float:
    """Closed-form entropy production along the relaxation of a diagonal state,
    single reservoir, commuting Hamiltonian (delta = 0)."""
    idx = p.active()
    if len(idx) != 1 or p.delta != 0:
        raise ContractError("closed form holds for one reservoir and delta = 0")
    g = p.gamma[idx[0]]
    t_a = p.t[idx[0]]
    decay = np.exp(-g * time)
    pop = decay * p00_initial + t_a * (1 - decay)
    return float(
        g
        * decay
        * (p00_initial - t_a)
        * (np.log(pop / (1 - pop)) - np.log(t_a / (1 - t_a)))
    )


@dataclass(frozen=True)
class ThreeQubitParams:
    """Chain A-C-B: onsite energies, onsite interaction U, nearest-neighbour
    hoppings J_alpha (A-C) and J_beta (C-B), end reset populations and rates,
    coupling constant g."""

    e_a: float
    e_c: float
    e_b: float
    u: float
    j_alpha: float
    j_beta: float
    t_a: float
    t_b: float
    gamma_a: float
    gamma_b: float
    g: float

    def __post_init__(self):
        for name in ("e_a", "e_c", "e_b", "u", "j_alpha", "j_beta", "g"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not np.isfinite(v):
                raise ContractError(f"{name} must be finite")
        for name in ("t_a", "t_b"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (0.0 < v < 1.0):
                raise ContractError(f"{name} must lie in (0,1)")
        for name in ("gamma_a", "gamma_b"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if v <= 0:
                raise ContractError(f"{name} must be positive")


def _number_op() -> np.ndarray:
    return np.diag([0.0, 1.0]).astype(complex)


def build_three_qubit(p: ThreeQubitParams) -> TripartiteQrm:
    """Assemble H = H0 + HI on the canonical ordered basis A (x) C (x) B."""
    i2 = np.eye(2, dtype=complex)
    n = _number_op()
    hop = np.zeros((4, 4), dtype=complex)
    hop[1, 2] = hop[2, 1] = 1.0  # |01><10| + |10><01| on two qubits
    nn = np.diag([0.0, 0.0, 0.0, 1.0]).astype(complex)  # |11><11| on two qubits

    h0 = (
        p.e_a * kron_all([n, i2, i2])
        + p.e_c * kron_all([i2, n, i2])
        + p.e_b * kron_all([i2, i2, n])
    )
    hi = (
        p.u * (kron(nn, i2) + kron(i2, nn))
        + p.j_alpha * kron(hop, i2)
        + p.j_beta * kron(i2, hop)
    )
    return TripartiteQrm(
        dims=(2, 2, 2),
        tau_a=_tau(p.t_a),
        tau_b=_tau(p.t_b),
        gamma_a=p.gamma_a,
        gamma_b=p.gamma_b,
        h=h0 + hi,
        g=p.g,
    )


def three_qubit_rho0_c(p: ThreeQubitParams) -> np.ndarray:
    """Closed-form central factor of the leading-order steady state."""
    den = p.j_alpha**2 * p.gamma_b + p.j_beta**2 * p.gamma_a
    top = p.j_alpha**2 * p.t_a * p.gamma_b + p.j_beta**2 * p.t_b * p.gamma_a
    bot = p.j_alpha**2 * (1 - p.t_a) * p.gamma_b + p.j_beta**2 * (1 - p.t_b) * p.gamma_a
    return np.diag([top / den, bot / den]).astype(complex)


def three_qubit_rho1(p: ThreeQubitParams) -> np.ndarray:
    """Closed-form first-order steady-state correction (8x8, Hermitian, traceless)."""
    pref = p.j_alpha * p.j_beta * (p.t_a - p.t_b) / (
        p.j_alpha**2 * p.gamma_b + p.j_beta**2 * p.gamma_a
    )
    ja, jb, ta, tb = p.j_alpha, p.j_beta, p.t_a, p.t_b
    m = np.zeros((8, 8), dtype=complex)
    m[1, 2] = 1j * ja * ta
    m[2, 4] = 1j * jb * tb
    m[3, 5] = 1j * jb * (1 - tb)
    m[5, 6] = 1j * ja * (1 - ta)
    m = m + np.conj(m.T)
    return pref * m


def three_qubit_commutator_h_rho0(p: ThreeQubitParams) -> np.ndarray:
    """Closed-form [H, rho0] (8x8, anti-Hermitian, real antisymmetric)."""
    pref = p.j_alpha * p.j_beta * (p.t_a - p.t_b) / (
        p.j_alpha**2 * p.gamma_b + p.j_beta**2 * p.gamma_a
    )
    ja, jb, ta, tb = p.j_alpha, p.j_beta, p.t_a, p.t_b
    ga, gb = p.gamma_a, p.gamma_b
    m = np.zeros((8, 8), dtype=complex)
    m[1, 2] = -ja * ta * gb
    m[2, 4] = -jb * tb * ga
    m[3, 5] = -jb * (1 - tb) * ga
    m[5, 6] = -ja * (1 - ta) * gb
    m = m - m.T
    return pref * m


def three_qubit_fluxes(
    sys: TripartiteQrm, g: float | None = None, rho_plus: np.ndarray | None = None
) -> tuple:
    """Steady-state entropy fluxes into the end reservoirs.

    phi_A = gamma_A tr((tau_A - tr_CB(rho+)) ln tau_A) and the B analogue;
    their sum is the steady-state entropy production.
    """
    if rho_plus is None:
        rho_plus = tripartite.exact_steady_state(sys, g=g)
    ln_ta = matops.logm_psd(sys.tau_a)
    ln_tb = matops.logm_psd(sys.tau_b)
    phi_a = sys.gamma_a * np.trace((sys.tau_a - sys.tr_cb(rho_plus)) @ ln_ta)
    phi_b = sys.gamma_b * np.trace((sys.tau_b - sys.tr_ac(rho_plus)) @ ln_tb)
    return float(np.real(phi_a)), float(np.real(phi_b))


def three_qubit_flux_leading_order(
    sys: TripartiteQrm, solution: tripartite.PerturbativeSolution | None = None
) -> tuple:
    """Order-g^2 flux coefficients tr(i[H, rho1] ln tau_# (x) I)."""
    sol = tripartite.perturbative_solution(sys) if solution is None else solution
    n_a, n_c, n_b = sys.dims
    com1 = matops.commutator(sys.h, sol.rho1)
    ln_ta_full = kron_all([matops.logm_psd(sys.tau_a), np.eye(n_c), np.eye(n_b)])
    ln_tb_full = kron_all([np.eye(n_a), np.eye(n_c), matops.logm_psd(sys.tau_b)])
    lead_a = float(np.real(np.trace(1j * com1 @ ln_ta_full)))
    lead_b = float(np.real(np.trace(1j * com1 @ ln_tb_full)))
    return lead_a, lead_b
