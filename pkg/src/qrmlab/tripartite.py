"""Tri-partite reset models: end dissipators, perturbative steady states,
second-order entropy production.

The Hilbert space is H_A (x) H_C (x) H_B with reset dissipation on the two end
factors and a weak coupling Hamiltonian g*H. The generator splits as
``L_g = L_0 + g L_1`` with ``L_0 = D_A + D_B`` and ``L_1 = -i[H, .]``, and the
steady state expands as ``rho_g = rho_0 + g rho_1 + O(g^2)``. The central
factor of rho_0 spans the one-dimensional kernel of the diagonal-restricted
coupling map; rho_1 follows from inverting L_0 on its admissible subspace plus
solvability conditions at the next two orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import matops
from .errors import (
    AssumptionError,
    ContractError,
    DegeneracyError,
    PositivityError,
    VerificationError,
)
from .matops import as_operator, commutator, dag, kron, partial_trace

__all__ = [
    "TripartiteQrm",
    "dissipator_apply",
    "full_generator_apply",
    "partial_generator_apply",
    "l0_inverse",
    "partial_dissipator_inverse",
    "h_bar_tau",
    "h_bar_tau_sharp",
    "RestrictedDiagonalMap",
    "phi_d_matrix",
    "phi_d_sharp_matrix",
    "AssumptionReport",
    "check_assumptions",
    "PerturbativeSolution",
    "perturbative_solution",
    "log_derivative",
    "SecondOrderEp",
    "second_order_ep",
    "double_commutator_trace",
    "exact_steady_state",
    "exact_partial_steady_state",
]

BOHR_GAP_TOL = 1e-9


@dataclass(frozen=True)
class TripartiteQrm:
    """End reset channels on A and B, coupling Hamiltonian H, coupling g."""

    dims: tuple
    tau_a: np.ndarray
    tau_b: np.ndarray
    gamma_a: float
    gamma_b: float
    h: np.ndarray
    g: float

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "tau_a", as_operator(self.tau_a))
        object.__setattr__(self, "tau_b", as_operator(self.tau_b))
        object.__setattr__(self, "h", as_operator(self.h))
        object.__setattr__(self, "gamma_a", float(self.gamma_a))
        object.__setattr__(self, "gamma_b", float(self.gamma_b))
        object.__setattr__(self, "g", float(self.g))
        if len(dims) != 3 or any(d <= 0 for d in dims):
            raise ContractError("dims must be three positive integers (n_A, n_C, n_B)")
        n_a, n_c, n_b = dims
        if self.tau_a.shape[0] != n_a or self.tau_b.shape[0] != n_b:
            raise ContractError("reset states must live on their end factors")
        if self.gamma_a <= 0 or self.gamma_b <= 0:
            raise ContractError("reset rates must be positive")
        if self.h.shape[0] != n_a * n_c * n_b:
            raise ContractError("coupling Hamiltonian must act on the full space")
        if not matops.is_hermitian(self.h):
            raise ContractError("coupling Hamiltonian must be Hermitian")
        for tau, name in ((self.tau_a, "tau_a"), (self.tau_b, "tau_b")):
            if not matops.is_density_matrix(tau, tol=1e-10):
                raise ContractError(f"{name} must be a density matrix")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def tr_a(self, x: np.ndarray) -> np.ndarray:
        return partial_trace(x, self.dims, keep=(1, 2))

    def tr_b(self, x: np.ndarray) -> np.ndarray:
        return partial_trace(x, self.dims, keep=(0, 1))

    def tr_ab(self, x: np.ndarray) -> np.ndarray:
        return partial_trace(x, self.dims, keep=(1,))

    def tr_cb(self, x: np.ndarray) -> np.ndarray:
        return partial_trace(x, self.dims, keep=(0,))

    def tr_ac(self, x: np.ndarray) -> np.ndarray:
        return partial_trace(x, self.dims, keep=(2,))


def dissipator_apply(sys: TripartiteQrm, which: str, rho: np.ndarray) -> np.ndarray:
    """Apply D_A, D_B or their sum."""
    rho = as_operator(rho)
    out = np.zeros_like(rho)
    if which in ("A", "both"):
        out = out + sys.gamma_a * (kron(sys.tau_a, sys.tr_a(rho)) - rho)
    if which in ("B", "both"):
        out = out + sys.gamma_b * (kron(sys.tr_b(rho), sys.tau_b) - rho)
    if which not in ("A", "B", "both"):
        raise ContractError(f"which must be 'A', 'B' or 'both', got {which!r}")
    return out


def full_generator_apply(sys: TripartiteQrm, rho: np.ndarray, g: float | None = None) -> np.ndarray:
    """L_g(rho) = -i g [H, rho] + D_A(rho) + D_B(rho)."""
    g = sys.g if g is None else float(g)
    rho = as_operator(rho)
    return -1j * g * commutator(sys.h, rho) + dissipator_apply(sys, "both", rho)


def partial_generator_apply(
    sys: TripartiteQrm, which: str, coupling: float, rho: np.ndarray
) -> np.ndarray:
    """One partial Lindbladian: -i*coupling*[H, rho] + D_#(rho).

    ``coupling`` is the effective constant (lambda*g for the A part,
    (1-lambda)*g for the B part).
    """
    if which not in ("A", "B"):
        raise ContractError("which must be 'A' or 'B'")
    rho = as_operator(rho)
    return -1j * coupling * commutator(sys.h, rho) + dissipator_apply(sys, which, rho)


def l0_inverse(sys: TripartiteQrm, x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Invert the uncoupled dissipator on {x : tr_AB(x) = 0}."""
    x = as_operator(x)
    resid = np.linalg.norm(sys.tr_ab(x))
    scale = max(np.linalg.norm(x), 1.0)
    if resid > tol * scale:
        raise ContractError(f"l0_inverse needs tr_AB(x) = 0, residual {resid:.3e}")
    ga, gb = sys.gamma_a, sys.gamma_b
    out = x + (ga / gb) * kron(sys.tau_a, sys.tr_a(x)) + (gb / ga) * kron(sys.tr_b(x), sys.tau_b)
    return -out / (ga + gb)


def partial_dissipator_inverse(
    sys: TripartiteQrm, which: str, x: np.ndarray, tol: float = 1e-10
) -> np.ndarray:
    """Invert one end dissipator on its admissible subspace: D_#^{-1}(x) = -x/gamma_#."""
    x = as_operator(x)
    if which == "A":
        resid = np.linalg.norm(sys.tr_a(x))
        gamma = sys.gamma_a
    elif which == "B":
        resid = np.linalg.norm(sys.tr_b(x))
        gamma = sys.gamma_b
    else:
        raise ContractError("which must be 'A' or 'B'")
    scale = max(np.linalg.norm(x), 1.0)
    if resid > tol * scale:
        raise ContractError(f"partial inverse needs tr_{which}(x) = 0, residual {resid:.3e}")
    return -x / gamma


def h_bar_tau(sys: TripartiteQrm) -> np.ndarray:
    """Reset-averaged Hamiltonian on the central factor."""
    n_a, n_c, n_b = sys.dims
    weight = matops.kron_all([sys.tau_a, np.eye(n_c), sys.tau_b])
    out = sys.tr_ab(sys.h @ weight)
    return (out + dag(out)) / 2


def h_bar_tau_sharp(sys: TripartiteQrm, which: str) -> np.ndarray:
    """Hamiltonian averaged over a single end factor (A -> acts on C(x)B, B -> A(x)C)."""
    n_a, n_c, n_b = sys.dims
    if which == "A":
        weight = matops.kron_all([sys.tau_a, np.eye(n_c), np.eye(n_b)])
        out = sys.tr_a(weight @ sys.h)
    elif which == "B":
        weight = matops.kron_all([np.eye(n_a), np.eye(n_c), sys.tau_b])
        out = sys.tr_b(weight @ sys.h)
    else:
        raise ContractError("which must be 'A' or 'B'")
    return (out + dag(out)) / 2


def _phase_fixed_eigh(m: np.ndarray):
    """Eigendecomposition with each eigenvector's largest component made real
    positive, so bases are reproducible across runs."""
    w, v = np.linalg.eigh((m + dag(m)) / 2)
    v = v.copy()
    for k in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, k])))
        phase = v[idx, k] / abs(v[idx, k])
        v[:, k] = v[:, k] / phase
    return w, v


def _simplicity_gap(w: np.ndarray) -> float:
    if len(w) < 2:
        return np.inf
    return float(np.min(np.diff(np.sort(w))))


def _bohr_distinct_gap(w: np.ndarray) -> float:
    """Smallest distance between distinct ordered-pair Bohr frequencies."""
    n = len(w)
    freqs = [(w[j] - w[k], (j, k)) for j in range(n) for k in range(n) if j != k]
    gap = np.inf
    for i in range(len(freqs)):
        for j in range(i + 1, len(freqs)):
            gap = min(gap, abs(freqs[i][0] - freqs[j][0]))
    return float(gap)


@dataclass(frozen=True)
class RestrictedDiagonalMap:
    """The coupling map restricted to diagonals of the averaged-Hamiltonian
    eigenbasis, represented as a square matrix on that subspace."""

    matrix: np.ndarray
    eigenvalues: np.ndarray
    basis: np.ndarray

    def kernel(self, gap_factor: float = 1e-8):
        """Kernel vector (diagonal coefficients) if one-dimensional, else raises."""
        u, sv, vh = np.linalg.svd(self.matrix)
        smax = sv[0] if sv[0] > 0 else 0.0
        if smax == 0.0:
            raise DegeneracyError("coupling map is identically zero")
        thresh = gap_factor * smax
        if sv[-1] > thresh or (len(sv) >= 2 and sv[-2] <= thresh):
            raise DegeneracyError(
                f"coupling-map kernel is not one-dimensional "
                f"(singular values {sv})"
            )
        return vh[-1].conj()

    def kernel_dim(self, gap_factor: float = 1e-8) -> int:
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        smax = sv[0] if sv[0] > 0 else 0.0
        if smax == 0.0:
            return self.matrix.shape[0]
        return int(np.sum(sv <= gap_factor * smax))

    def kernel_state(self, gap_factor: float = 1e-8, psd_tol: float = 1e-12) -> np.ndarray:
        """Trace-one state built from the kernel vector.

        Mixed-sign kernel entries beyond tolerance surface as a positivity
        error instead of being silently projected.
        """
        c = self.kernel(gap_factor)
        tr = np.sum(c)
        if abs(tr) < 1e-12:
            raise PositivityError("kernel vector has zero trace")
        c = c / tr
        if np.max(np.abs(np.imag(c))) > 1e-9:
            raise PositivityError("kernel vector is not real in the diagonal basis")
        c = np.real(c)
        if np.min(c) < -psd_tol:
            raise PositivityError(f"kernel vector has negative weight {np.min(c):.3e}")
        c = np.where(c < 0, 0.0, c)
        c = c / np.sum(c)
        return (self.basis * c) @ dag(self.basis)


def _diag_part(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("ij,jk,ki->i", dag(basis), x, basis))


def _require_simple(w: np.ndarray, name: str):
    gap = _simplicity_gap(w)
    scale = max(float(np.max(np.abs(w))), 1.0)
    if gap <= BOHR_GAP_TOL * scale:
        raise AssumptionError(name, f"spectrum not simple (gap {gap:.3e})")


def phi_d_matrix(sys: TripartiteQrm) -> RestrictedDiagonalMap:
    """Diagonal restriction of the central coupling map.

    Column j holds the diagonal part (in the averaged-Hamiltonian eigenbasis)
    of tr_AB([H, L0^{-1}([H, tau_A (x) P_j (x) tau_B])]). The averaged
    Hamiltonian must have simple spectrum for the diagonal subspace to be
    well defined.
    """
    n_c = sys.dims[1]
    hbar = h_bar_tau(sys)
    w, v = _phase_fixed_eigh(hbar)
    _require_simple(w, "Spec(htau)")
    mat = np.zeros((n_c, n_c), dtype=float)
    for j in range(n_c):
        p_j = np.outer(v[:, j], v[:, j].conj())
        inner = commutator(sys.h, matops.kron_all([sys.tau_a, p_j, sys.tau_b]))
        out = sys.tr_ab(commutator(sys.h, l0_inverse(sys, inner)))
        mat[:, j] = _diag_part(out, v)
    return RestrictedDiagonalMap(mat, w, v)


def phi_d_sharp_matrix(sys: TripartiteQrm, which: str) -> RestrictedDiagonalMap:
    """Diagonal restriction of the single-end coupling map (on C(x)B or A(x)C)."""
    hbar = h_bar_tau_sharp(sys, which)
    w, v = _phase_fixed_eigh(hbar)
    _require_simple(w, f"Spec(htau_{which})")
    n = hbar.shape[0]
    mat = np.zeros((n, n), dtype=float)
    for j in range(n):
        p_j = np.outer(v[:, j], v[:, j].conj())
        if which == "A":
            embedded = kron(sys.tau_a, p_j)
            inner = commutator(sys.h, embedded)
            out = sys.tr_a(commutator(sys.h, partial_dissipator_inverse(sys, "A", inner)))
        else:
            embedded = kron(p_j, sys.tau_b)
            inner = commutator(sys.h, embedded)
            out = sys.tr_b(commutator(sys.h, partial_dissipator_inverse(sys, "B", inner)))
        mat[:, j] = _diag_part(out, v)
    return RestrictedDiagonalMap(mat, w, v)


@dataclass(frozen=True)
class AssumptionReport:
    """Genericity checks: simple averaged spectra with distinct Bohr
    frequencies, one-dimensional coupling kernels, positive leading states."""

    spec_htau: bool
    spec_htau_gap: float
    spec_htau_a: bool
    spec_htau_a_gap: float
    spec_htau_b: bool
    spec_htau_b_gap: float
    coup: bool
    coup_kernel_dim: int
    coup_a: bool
    coup_a_kernel_dim: int
    coup_b: bool
    coup_b_kernel_dim: int
    pos: bool
    min_eigenvalues: dict

    def all_ok(self) -> bool:
        return (
            self.spec_htau
            and self.spec_htau_a
            and self.spec_htau_b
            and self.coup
            and self.coup_a
            and self.coup_b
            and self.pos
        )

    def failed(self) -> list[str]:
        out = []
        for name in ("spec_htau", "spec_htau_a", "spec_htau_b", "coup", "coup_a", "coup_b", "pos"):
            if not getattr(self, name):
                out.append(name)
        return out

    def as_dict(self) -> dict:
        return {
            "spec_htau": {"ok": self.spec_htau, "min_gap": self.spec_htau_gap},
            "spec_htau_a": {"ok": self.spec_htau_a, "min_gap": self.spec_htau_a_gap},
            "spec_htau_b": {"ok": self.spec_htau_b, "min_gap": self.spec_htau_b_gap},
            "coup": {"ok": self.coup, "kernel_dim": self.coup_kernel_dim},
            "coup_a": {"ok": self.coup_a, "kernel_dim": self.coup_a_kernel_dim},
            "coup_b": {"ok": self.coup_b, "kernel_dim": self.coup_b_kernel_dim},
            "pos": {"ok": self.pos, "min_eigenvalues": dict(self.min_eigenvalues)},
            "all_ok": self.all_ok(),
        }


def check_assumptions(sys: TripartiteQrm, tol: float = 1e-8) -> AssumptionReport:
    """Measure every genericity assumption; failures are reported, not raised."""
    gaps = {}
    oks = {}
    for name, hb in (
        ("htau", h_bar_tau(sys)),
        ("htau_a", h_bar_tau_sharp(sys, "A")),
        ("htau_b", h_bar_tau_sharp(sys, "B")),
    ):
        w = np.linalg.eigvalsh(hb)
        scale = max(np.max(np.abs(w)), 1.0)
        gap = min(_simplicity_gap(w), _bohr_distinct_gap(w))
        gaps[name] = float(gap)
        oks[name] = bool(gap > tol * scale)

    kdims = {}
    kernel_states = {}
    for name, builder in (
        ("coup", lambda: phi_d_matrix(sys)),
        ("coup_a", lambda: phi_d_sharp_matrix(sys, "A")),
        ("coup_b", lambda: phi_d_sharp_matrix(sys, "B")),
    ):
        try:
            m = builder()
            kdims[name] = m.kernel_dim()
            if kdims[name] == 1:
                try:
                    kernel_states[name] = m.kernel_state()
                except (PositivityError, DegeneracyError):
                    kernel_states[name] = None
            else:
                kernel_states[name] = None
        except (ContractError, AssumptionError):
            # an ill-defined diagonal subspace leaves the kernel dimension unknown
            kdims[name] = -1
            kernel_states[name] = None

    min_eigs = {
        "tau_a": float(np.linalg.eigvalsh(sys.tau_a)[0]),
        "tau_b": float(np.linalg.eigvalsh(sys.tau_b)[0]),
    }
    for name, key in (("coup", "rho0_c"), ("coup_a", "rho0_cb"), ("coup_b", "rho0_ac")):
        state = kernel_states[name]
        min_eigs[key] = float(np.linalg.eigvalsh(state)[0]) if state is not None else float("nan")

    pos_ok = all(np.isfinite(v) and v > 0 for v in min_eigs.values())
    return AssumptionReport(
        spec_htau=oks["htau"],
        spec_htau_gap=gaps["htau"],
        spec_htau_a=oks["htau_a"],
        spec_htau_a_gap=gaps["htau_a"],
        spec_htau_b=oks["htau_b"],
        spec_htau_b_gap=gaps["htau_b"],
        coup=kdims["coup"] == 1,
        coup_kernel_dim=kdims["coup"],
        coup_a=kdims["coup_a"] == 1,
        coup_a_kernel_dim=kdims["coup_a"],
        coup_b=kdims["coup_b"] == 1,
        coup_b_kernel_dim=kdims["coup_b"],
        pos=bool(pos_ok),
        min_eigenvalues=min_eigs,
    )


def log_derivative(rho0: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """First-order term of ln(rho0 + s*delta) at s=0 for faithful rho0.

    In the eigenbasis of rho0 the (i, j) block picks up the divided difference
    (ln r_i - ln r_j)/(r_i - r_j); near-degenerate pairs (relative gap below
    1e-9) use the midpoint inverse, which keeps the result exactly Hermitian
    for Hermitian delta.
    """
    rho0 = as_operator(rho0)
    delta = as_operator(delta)
    r, u = np.linalg.eigh((rho0 + dag(rho0)) / 2)
    if r[0] <= 0:
        raise PositivityError(f"log derivative needs a faithful state, min eigenvalue {r[0]:.3e}")
    d_eig = dag(u) @ delta @ u
    n = len(r)
    dd = np.empty((n, n), dtype=float)
    for i in range(n):
        for j in range(n):
            if abs(r[i] - r[j]) < 1e-9 * max(r[i], r[j]):
                dd[i, j] = 2.0 / (r[i] + r[j])
            else:
                dd[i, j] = (np.log(r[i]) - np.log(r[j])) / (r[i] - r[j])
    return u @ (d_eig * dd) @ dag(u)


@dataclass(frozen=True)
class PerturbativeSolution:
    """Leading terms of the steady-state expansion and their logarithms.

    ``rho0_sharp``/``rho1_sharp``/``q1_sharp`` hold the analogous terms for the
    single-end generators, keyed by 'A' and 'B'.
    """

    rho0: np.ndarray
    rho0_c: np.ndarray
    rho1: np.ndarray
    q1: np.ndarray
    rho0_sharp: dict
    rho1_sharp: dict
    q1_sharp: dict


def _offdiag_correction(
    m: np.ndarray, eigenvalues: np.ndarray, basis: np.ndarray
) -> np.ndarray:
    """Solve [Hbar, X] = -i*Offdiag(m) for the off-diagonal X in the eigenbasis."""
    m_eig = dag(basis) @ m @ basis
    n = len(eigenvalues)
    x = np.zeros((n, n), dtype=complex)
    scale = max(np.max(np.abs(eigenvalues)), 1.0)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = eigenvalues[i] - eigenvalues[j]
            if abs(gap) < BOHR_GAP_TOL * scale:
                raise AssumptionError(
                    "Spec", f"Bohr frequency gap {gap:.3e} below tolerance"
                )
            x[i, j] = -1j * m_eig[i, j] / gap
    return basis @ x @ dag(basis)


def _diag_correction(
    phi: RestrictedDiagonalMap, b: np.ndarray, kernel_coeffs: np.ndarray
) -> np.ndarray:
    """Solve phi(w) = -b on diagonals with the trace-zero normalization."""
    w, *_ = np.linalg.lstsq(phi.matrix, -b, rcond=None)
    w = w - (np.sum(w) / np.sum(kernel_coeffs)) * kernel_coeffs
    return w


def _first_order_expansion(
    rho0: np.ndarray,
    phi: RestrictedDiagonalMap,
    kernel_coeffs: np.ndarray,
    embed: Callable[[np.ndarray], np.ndarray],
    tr_out: Callable[[np.ndarray], np.ndarray],
    inv: Callable[[np.ndarray], np.ndarray],
    h: np.ndarray,
):
    """Shared first-order machinery for the full and single-end expansions.

    ``embed`` lifts a central-space operator to the full space, ``tr_out``
    projects back, ``inv`` inverts the relevant dissipator on its admissible
    subspace.
    """
    com0 = commutator(h, rho0)
    r1 = 1j * inv(com0)
    m = tr_out(commutator(h, inv(com0)))
    r_off = _offdiag_correction(m, phi.eigenvalues, phi.basis)
    arg = commutator(h, inv(commutator(h, r1 + embed(r_off))))
    b = _diag_part(tr_out(arg), phi.basis)
    w_diag = _diag_correction(phi, b, kernel_coeffs)
    r_c = (phi.basis * w_diag) @ dag(phi.basis) + r_off
    rho1 = r1 + embed(r_c)
    rho1 = (rho1 + dag(rho1)) / 2
    return rho1


def perturbative_solution(sys: TripartiteQrm, include_sharp: bool = True) -> PerturbativeSolution:
    """Leading steady-state terms for the full and single-end generators.

    Each sub-expansion checks the assumptions it actually consumes: a simple
    averaged spectrum (the diagonal subspace and the commutator inverse), a
    one-dimensional coupling kernel, and positivity of the leading state. The
    single-end expansions are skipped when ``include_sharp`` is false, which
    lets the central expansion proceed when only the end-reservoir genericity
    fails.
    """
    # full generator
    phi = phi_d_matrix(sys)
    c0 = np.real(phi.kernel())
    c0 = c0 / np.sum(c0)
    rho0_c = phi.kernel_state()
    rho0 = matops.kron_all([sys.tau_a, rho0_c, sys.tau_b])
    rho1 = _first_order_expansion(
        rho0,
        phi,
        c0,
        embed=lambda r: matops.kron_all([sys.tau_a, r, sys.tau_b]),
        tr_out=sys.tr_ab,
        inv=lambda x: l0_inverse(sys, x),
        h=sys.h,
    )
    q1 = log_derivative(rho0, rho1)

    rho0_sharp: dict = {}
    rho1_sharp: dict = {}
    q1_sharp: dict = {}
    if include_sharp:
        for which in ("A", "B"):
            phi_s = phi_d_sharp_matrix(sys, which)
            c_s = np.real(phi_s.kernel())
            c_s = c_s / np.sum(c_s)
            center = phi_s.kernel_state()
            if which == "A":
                rho0_s = kron(sys.tau_a, center)
                embed = lambda r: kron(sys.tau_a, r)
                tr_out = sys.tr_a
                inv = lambda x: partial_dissipator_inverse(sys, "A", x)
            else:
                rho0_s = kron(center, sys.tau_b)
                embed = lambda r: kron(r, sys.tau_b)
                tr_out = sys.tr_b
                inv = lambda x: partial_dissipator_inverse(sys, "B", x)
            rho1_s = _first_order_expansion(rho0_s, phi_s, c_s, embed, tr_out, inv, sys.h)
            rho0_sharp[which] = rho0_s
            rho1_sharp[which] = rho1_s
            q1_sharp[which] = log_derivative(rho0_s, rho1_s)

    return PerturbativeSolution(
        rho0=rho0,
        rho0_c=rho0_c,
        rho1=rho1,
        q1=q1,
        rho0_sharp=rho0_sharp,
        rho1_sharp=rho1_sharp,
        q1_sharp=q1_sharp,
    )


@dataclass(frozen=True)
class SecondOrderEp:
    """Quadratic-in-lambda coefficients of the order-g^2 entropy production.

    sigma2(lambda) = aA l^2 + bA l + cA + aB (1-l)^2 + bB (1-l) + cB.
    ``classification`` is one of 'identically_zero', 'positive_all_lambda',
    'positive_except_one_lambda' (then ``lambda0`` holds the zero).
    """

    a_a: float
    b_a: float
    c_a: float
    a_b: float
    b_b: float
    c_b: float
    lambdas: tuple
    sigma2_values: tuple
    classification: str
    lambda0: float | None
    remark_residual: float

    def sigma2(self, lam: float) -> float:
        return (
            self.a_a * lam**2
            + self.b_a * lam
            + self.c_a
            + self.a_b * (1 - lam) ** 2
            + self.b_b * (1 - lam)
            + self.c_b
        )


def _classify(a_a, b_a, c_a, a_b, b_b, c_b, atol: float):
    part_a_zero = max(abs(a_a), abs(b_a), abs(c_a)) <= atol
    part_b_zero = max(abs(a_b), abs(b_b), abs(c_b)) <= atol
    if part_a_zero and part_b_zero:
        return "identically_zero", None
    # total quadratic A l^2 + B l + C
    a2 = a_a + a_b
    b2 = b_a - b_b - 2 * a_b
    c2 = c_a + a_b + b_b + c_b
    scale = max(abs(a2), abs(b2), abs(c2), atol)
    if abs(a2) <= atol:
        if abs(b2) > 1e-6 * scale:
            raise VerificationError("affine second-order EP with nonzero slope cannot stay nonnegative")
        if abs(c2) <= atol:
            return "identically_zero", None
        return "positive_all_lambda", None
    lam0 = -b2 / (2 * a2)
    minimum = c2 - b2 * b2 / (4 * a2)
    if minimum > 1e-9 * scale:
        return "positive_all_lambda", None
    if minimum < -1e-9 * scale:
        raise VerificationError(f"second-order EP dips negative ({minimum:.3e}); theory violated")
    return "positive_except_one_lambda", float(lam0)


def second_order_ep(
    sys: TripartiteQrm,
    lambda_grid: Sequence[float],
    solution: PerturbativeSolution | None = None,
    atol: float = 1e-12,
) -> SecondOrderEp:
    """Second-order entropy-production coefficients and their trichotomy."""
    sol = perturbative_solution(sys) if solution is None else solution
    h = sys.h
    ln_rho0 = matops.logm_psd(sol.rho0)
    ln_rho0_a = matops.logm_psd(sol.rho0_sharp["A"])
    ln_rho0_b = matops.logm_psd(sol.rho0_sharp["B"])
    com0 = commutator(h, sol.rho0)
    com1 = commutator(h, sol.rho1)
    d_a1 = dissipator_apply(sys, "A", sol.rho1)
    d_b1 = dissipator_apply(sys, "B", sol.rho1)
    q1, q1a, q1b = sol.q1, sol.q1_sharp["A"], sol.q1_sharp["B"]

    tr = lambda x: float(np.real(np.trace(x)))
    a_a = tr(-1j * com0 @ q1a)
    b_a = tr(d_a1 @ q1a + 1j * com0 @ q1 - 1j * com1 @ (ln_rho0_a - ln_rho0))
    c_a = -tr(d_a1 @ q1)
    a_b = tr(-1j * com0 @ q1b)
    b_b = tr(d_b1 @ q1b + 1j * com0 @ q1 - 1j * com1 @ (ln_rho0_b - ln_rho0))
    c_b = -tr(d_b1 @ q1)

    remark_residual = float(np.linalg.norm(1j * com0 - d_a1 - d_b1))
    classification, lam0 = _classify(a_a, b_a, c_a, a_b, b_b, c_b, atol)
    lambdas = tuple(float(l) for l in lambda_grid)
    out = SecondOrderEp(
        a_a=a_a,
        b_a=b_a,
        c_a=c_a,
        a_b=a_b,
        b_b=b_b,
        c_b=c_b,
        lambdas=lambdas,
        sigma2_values=(),
        classification=classification,
        lambda0=lam0,
        remark_residual=remark_residual,
    )
    values = tuple(out.sigma2(l) for l in lambdas)
    object.__setattr__(out, "sigma2_values", values)
    return out


def double_commutator_trace(h: np.ndarray, k: np.ndarray, f: Callable[[float], float]) -> float:
    """tr([[H, K], f(K)] H) evaluated spectrally for normal K.

    For Hermitian H, positive K and f = ln the value is nonnegative and
    vanishes exactly when [H, K] = 0.
    """
    h = as_operator(h)
    k = as_operator(k)
    if matops.is_hermitian(k):
        w, v = np.linalg.eigh((k + dag(k)) / 2)
        w = w.astype(complex)
    else:
        norm_resid = np.linalg.norm(commutator(k, dag(k)))
        if norm_resid > 1e-10 * max(np.linalg.norm(k) ** 2, 1.0):
            raise ContractError("double_commutator_trace requires a normal operator")
        from scipy.linalg import schur

        t, v = schur(k, output="complex")
        w = np.diag(t)
    h_eig = dag(v) @ h @ v
    fw = np.array([f(x) for x in (np.real(w) if np.allclose(w.imag, 0) else w)])
    out = 0.0 + 0.0j
    n = len(w)
    for i in range(n):
        for j in range(n):
            out += h_eig[i, j] * h_eig[j, i] * (w[i] - w[j]) * (fw[i] - fw[j])
    return float(np.real(out))


def _kernel_state_hiprec(matrix: np.ndarray, dim: int, dps: int = 40) -> np.ndarray:
    """Trace-one kernel of a trace-preserving superoperator by a bordered
    linear solve in extended precision.

    Adding the rank-one trace border makes the system nonsingular whenever the
    kernel is one-dimensional with nonzero trace, and the solution then
    satisfies the kernel equation exactly. Used where the spectral gap is far
    below what double-precision SVD vectors can resolve.
    """
    from mpmath import mp

    n = dim * dim
    diag_idx = [k + dim * k for k in range(dim)]
    with mp.workdps(dps):
        bordered = mp.matrix(n, n)
        for i in range(n):
            for j in range(n):
                z = complex(matrix[i, j])
                bordered[i, j] = mp.mpc(z.real, z.imag)
        for i in diag_idx:
            for j in diag_idx:
                bordered[i, j] += mp.mpf(1) / dim
        rhs = mp.matrix(n, 1)
        for i in diag_idx:
            rhs[i] = mp.mpf(1) / dim
        x = mp.lu_solve(bordered, rhs)
        flat = np.array([complex(x[i]) for i in range(n)], dtype=complex)
    rho = flat.reshape(dim, dim, order="F")
    rho = (rho + dag(rho)) / 2
    w, v = np.linalg.eigh(rho)
    w = np.where(w < -1e-12, 0.0, w)
    rho = (v * w) @ dag(v)
    return rho / np.trace(rho)


def exact_steady_state(
    sys: TripartiteQrm, g: float | None = None, precise: bool = False
) -> np.ndarray:
    """Brute-force steady state: trace-one kernel of the vectorized generator.

    The spectral gap of the generator closes as g^2 when the coupling is
    small, so the kernel-uniqueness threshold is much tighter here than the
    generic default (a truly degenerate kernel still has singular values at
    rounding level and is flagged, as happens at g = 0). With ``precise`` the
    SVD solution is replaced by an extended-precision bordered solve, needed
    when the state error eps/gap would be visible in the observable.
    """
    g = sys.g if g is None else float(g)
    sup = matops.vectorize_map(
        lambda x: full_generator_apply(sys, x, g=g), sys.dim, check_linearity=False
    )
    smax = float(np.linalg.norm(sup.matrix, ord=2))
    state = matops.nullspace_unique(sup, gap_tol=1e-13 * max(smax, 1.0))
    if precise:
        return _kernel_state_hiprec(sup.matrix, sys.dim)
    return state


def exact_partial_steady_state(sys: TripartiteQrm, which: str, coupling: float) -> np.ndarray:
    """Kernel of one partial Lindbladian at the given effective coupling."""
    sup = matops.vectorize_map(
        lambda x: partial_generator_apply(sys, which, coupling, x),
        sys.dim,
        check_linearity=False,
    )
    smax = float(np.linalg.norm(sup.matrix, ord=2))
    return matops.nullspace_unique(sup, gap_tol=1e-13 * max(smax, 1.0))
