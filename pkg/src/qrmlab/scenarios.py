"""Scenario implementations behind the command-line runner.

Each scenario maps a validated configuration to a deterministic table (grid
axes first, observables after) plus a metadata echo. Grid points are
independent; the runner may evaluate them concurrently and merges results by
grid index, so output never depends on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import affine, entropy, matops, models, qrm, tripartite
from .errors import ConfigError

__all__ = ["Axis", "ScenarioConfig", "ScenarioResult", "SCENARIOS", "run", "validate_config"]


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    parameters: dict
    grid: tuple
    output_format: str
    output_path: str


@dataclass
class ScenarioResult:
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    payload: dict | None = None  # report-style scenarios emit a dict instead
    reference_loci: dict = field(default_factory=dict)


def _param(pars: dict, key: str, kind=float, default=None, required=True):
    if key not in pars:
        if not required or default is not None:
            return default
        raise ConfigError(f"parameters.{key}: missing required parameter")
    try:
        if kind is float:
            return float(pars[key])
        if kind is int:
            return int(pars[key])
        return pars[key]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameters.{key}: {exc}") from exc


def _float_list(pars: dict, key: str, length: int | None = None):
    v = pars.get(key)
    if v is None:
        raise ConfigError(f"parameters.{key}: missing required parameter")
    if not isinstance(v, (list, tuple)):
        raise ConfigError(f"parameters.{key}: expected a list")
    out = [float(x) for x in v]
    if length is not None and len(out) != length:
        raise ConfigError(f"parameters.{key}: expected {length} entries, got {len(out)}")
    return out


def _grid_points(cfg: ScenarioConfig):
    """Cartesian product of axis values, slowest axis first."""
    if len(cfg.grid) == 1:
        return [(v,) for v in cfg.grid[0].values()]
    a, b = cfg.grid
    return [(va, vb) for va in a.values() for vb in b.values()]


def _map_points(points, fn, threads: int):
    if threads <= 1:
        return [fn(*pt) for pt in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda pt: fn(*pt), points))


def _require_axes(cfg: ScenarioConfig, allowed: list):
    names = tuple(ax.name for ax in cfg.grid)
    if list(names) not in allowed:
        raise ConfigError(
            f"grid: scenario {cfg.scenario!r} needs axes in {allowed}, got {list(names)}"
        )
    return names


# ---------------------------------------------------------------------------
# single-qubit scenarios


def _qubit_params(pars: dict, t_values, lambdas=None) -> models.SingleQubitParams:
    return models.SingleQubitParams(
        epsilon=_param(pars, "epsilon", default=1.0, required=False),
        delta=_param(pars, "delta"),
        t=tuple(t_values),
        gamma=tuple(_float_list(pars, "gammas")),
        lambdas=lambdas,
    )


def _scenario_single_qubit_ep_grid(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    _require_axes(cfg, [["t_A", "t_B"]])
    pars = cfg.parameters
    gammas = _float_list(pars, "gammas", 3)
    t_c = _param(pars, "t_C")
    lambdas = pars.get("lambdas")
    if lambdas is not None:
        lambdas = tuple(float(x) for x in lambdas)

    def point(t_a, t_b):
        p = _qubit_params(pars, (t_a, t_b, t_c), lambdas)
        sys = models.build_single_qubit(p)
        split = affine.AffineSplit(p.active_lambdas())
        rep = affine.sigma_components(sys, split)
        return (t_a, t_b, rep.total, *rep.per_reservoir)

    rows = _map_points(_grid_points(cfg), point, threads)
    return ScenarioResult(
        columns=["t_A", "t_B", "ep_total", "sigma_A", "sigma_B", "sigma_C"],
        rows=rows,
        reference_loci={"points": [[t_c, t_c]], "diagonal": True},
    )


def _scenario_affine_lambda_grid(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    _require_axes(cfg, [["lambda_A", "lambda_B"]])
    pars = cfg.parameters
    gammas = _float_list(pars, "gammas", 3)
    t_common = _param(pars, "t")
    gamma_total = sum(gammas)

    def point(lam_a, lam_b):
        lam_c = 1.0 - lam_a - lam_b
        p = _qubit_params(pars, (t_common,) * 3, (lam_a, lam_b, lam_c))
        sys = models.build_single_qubit(p)
        split = affine.AffineSplit(p.active_lambdas())
        rep = affine.sigma_components(sys, split)
        return (lam_a, lam_b, rep.total, *rep.per_reservoir)

    rows = _map_points(_grid_points(cfg), point, threads)
    return ScenarioResult(
        columns=["lambda_A", "lambda_B", "ep_total", "sigma_A", "sigma_B", "sigma_C"],
        rows=rows,
        reference_loci={
            "vlines": [gammas[0] / gamma_total],
            "hlines": [gammas[1] / gamma_total],
        },
    )


def _scenario_lemma46_grid(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    _require_axes(cfg, [["lambda", "mu"]])
    pars = cfg.parameters
    p = models.SingleQubitParams(
        epsilon=_param(pars, "epsilon", default=1.0, required=False),
        delta=_param(pars, "delta"),
        t=(_param(pars, "t_A"),),
        gamma=(_param(pars, "gamma_A"),),
    )
    sys = models.build_single_qubit(p)
    mu_axis = cfg.grid[1]
    if np.any(mu_axis.values() == 0.0):
        raise ConfigError("grid.axes[1]: the mu axis must not contain 0")

    def point(lam, mu):
        q = affine.lemma46_quantity(sys, lam, mu)
        return (lam, mu, q, (1.0 - lam / mu) * q)

    rows = _map_points(_grid_points(cfg), point, threads)
    return ScenarioResult(
        columns=["lambda", "mu", "quantity", "signed_quantity"],
        rows=rows,
        reference_loci={"diagonal": True},
    )


# ---------------------------------------------------------------------------
# tripartite scenarios


def _three_qubit_params(pars: dict, t_b: float | None = None, g: float = 0.0):
    return models.ThreeQubitParams(
        e_a=_param(pars, "e_A"),
        e_c=_param(pars, "e_C"),
        e_b=_param(pars, "e_B"),
        u=_param(pars, "U"),
        j_alpha=_param(pars, "J_alpha"),
        j_beta=_param(pars, "J_beta"),
        t_a=_param(pars, "t_A"),
        t_b=_param(pars, "t_B") if t_b is None else t_b,
        gamma_a=_param(pars, "gamma_A"),
        gamma_b=_param(pars, "gamma_B"),
        g=g,
    )


def _tripartite_axes(cfg: ScenarioConfig, first: str, second: str):
    names = _require_axes(cfg, [[first], [first, second]])
    return len(names) == 2


def _scenario_tripartite_trace_distance(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    has_tb_axis = _tripartite_axes(cfg, "g", "t_B")
    pars = cfg.parameters
    precise = bool(pars.get("precise", True))
    tb_values = cfg.grid[1].values() if has_tb_axis else [_param(pars, "t_B")]
    sols = {}
    systems = {}
    for t_b in tb_values:
        p = _three_qubit_params(pars, t_b=float(t_b))
        systems[float(t_b)] = models.build_three_qubit(p)
        sols[float(t_b)] = tripartite.perturbative_solution(
            systems[float(t_b)], include_sharp=False
        )

    def point(g, t_b=None):
        t_b = float(tb_values[0]) if t_b is None else float(t_b)
        sys = systems[t_b]
        sol = sols[t_b]
        rho_g = tripartite.exact_steady_state(sys, g=g, precise=precise)
        td = matops.trace_distance(rho_g, sol.rho0 + g * sol.rho1)
        row = (g, td, td / g**2)
        return (g, t_b, td, td / g**2) if has_tb_axis else row

    rows = _map_points(_grid_points(cfg), point, threads)
    cols = ["g", "t_B", "trace_distance", "td_over_g2"] if has_tb_axis else [
        "g",
        "trace_distance",
        "td_over_g2",
    ]
    return ScenarioResult(columns=cols, rows=rows)


def _exact_total_ep(sys, g: float, lam: float) -> float:
    """Steady-state entropy production from the split generators and the exact
    kernels of the partial Lindbladians."""
    rho_g = tripartite.exact_steady_state(sys, g=g)
    rho_a = tripartite.exact_partial_steady_state(sys, "A", lam * g)
    rho_b = tripartite.exact_partial_steady_state(sys, "B", (1.0 - lam) * g)
    gens = [
        lambda r: tripartite.partial_generator_apply(sys, "A", lam * g, r),
        lambda r: tripartite.partial_generator_apply(sys, "B", (1.0 - lam) * g, r),
    ]
    return entropy.entropy_production(gens, rho_g, [rho_a, rho_b]).total


def _scenario_tripartite_ep_remainder(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    has_tb_axis = _tripartite_axes(cfg, "g", "t_B")
    pars = cfg.parameters
    lam = _param(pars, "lambda", default=0.5, required=False)
    tb_values = cfg.grid[1].values() if has_tb_axis else [_param(pars, "t_B")]
    systems = {}
    sigma2 = {}
    for t_b in tb_values:
        p = _three_qubit_params(pars, t_b=float(t_b))
        sys = models.build_three_qubit(p)
        systems[float(t_b)] = sys
        so = tripartite.second_order_ep(sys, [lam])
        sigma2[float(t_b)] = so.sigma2(lam)

    def point(g, t_b=None):
        t_b = float(tb_values[0]) if t_b is None else float(t_b)
        sys = systems[t_b]
        s2 = sigma2[t_b]
        sig = _exact_total_ep(sys, g, lam)
        rem = sig - g**2 * s2
        head = (g,) if not has_tb_axis else (g, t_b)
        return (*head, sig, s2, rem, rem / g**4)

    rows = _map_points(_grid_points(cfg), point, threads)
    head = ["g"] if not has_tb_axis else ["g", "t_B"]
    return ScenarioResult(
        columns=head + ["sigma_exact", "sigma2", "remainder", "remainder_over_g4"],
        rows=rows,
    )


def _scenario_tripartite_flux_sweep(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    has_g_axis = _tripartite_axes(cfg, "t_B", "g")
    pars = cfg.parameters
    g_values = cfg.grid[1].values() if has_g_axis else [_param(pars, "g")]
    tb_values = cfg.grid[0].values()
    systems = {}
    leading = {}
    for t_b in tb_values:
        p = _three_qubit_params(pars, t_b=float(t_b))
        sys = models.build_three_qubit(p)
        systems[float(t_b)] = sys
        sol = tripartite.perturbative_solution(sys, include_sharp=False)
        leading[float(t_b)] = models.three_qubit_flux_leading_order(sys, solution=sol)

    def point(t_b, g=None):
        t_b = float(t_b)
        g = float(g_values[0]) if g is None else float(g)
        sys = systems[t_b]
        phi_a, phi_b = models.three_qubit_fluxes(sys, g=g)
        lead_a, lead_b = leading[t_b]
        head = (t_b,) if not has_g_axis else (t_b, g)
        return (
            *head,
            phi_a,
            phi_b,
            phi_a + phi_b,
            g**2 * lead_a,
            g**2 * lead_b,
            (phi_a - g**2 * lead_a) / g**4,
            (phi_b - g**2 * lead_b) / g**4,
        )

    rows = _map_points(_grid_points(cfg), point, threads)
    head = ["t_B"] if not has_g_axis else ["t_B", "g"]
    return ScenarioResult(
        columns=head
        + [
            "phi_A",
            "phi_B",
            "sigma",
            "phi_A_leading_g2",
            "phi_B_leading_g2",
            "phi_A_remainder_over_g4",
            "phi_B_remainder_over_g4",
        ],
        rows=rows,
        reference_loci={"vlines": [_param(pars, "t_A")]},
    )


def _scenario_assumptions_report(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    p = _three_qubit_params(cfg.parameters, g=_param(cfg.parameters, "g", default=0.0, required=False))
    sys = models.build_three_qubit(p)
    report = tripartite.check_assumptions(sys)
    return ScenarioResult(payload=report.as_dict())


def _parse_matrix(raw, where: str) -> np.ndarray:
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(f"{where}: expected a nested list")
    rows = []
    for r in raw:
        row = []
        for entry in r:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ConfigError(f"{where}: complex entries are [re, im] pairs")
                row.append(complex(float(entry[0]), float(entry[1])))
            else:
                row.append(complex(float(entry), 0.0))
        rows.append(row)
    return np.array(rows, dtype=complex)


def _scenario_custom_system(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    pars = cfg.parameters
    h = _parse_matrix(pars.get("h"), "parameters.h")
    raw_channels = pars.get("channels")
    if not isinstance(raw_channels, (list, tuple)) or not raw_channels:
        raise ConfigError("parameters.channels: expected a nonempty list")
    channels = []
    for i, ch in enumerate(raw_channels):
        tau = _parse_matrix(ch.get("tau"), f"parameters.channels[{i}].tau")
        gamma = float(ch.get("gamma", 0.0))
        channels.append(qrm.ResetChannel(tau, gamma))
    sys = qrm.QrmSystem(h, tuple(channels))
    lambdas = pars.get("lambdas")
    split = (
        affine.AffineSplit(tuple(float(x) for x in lambdas))
        if lambdas is not None
        else affine.AffineSplit.proportional(sys)
    )
    rho_plus = qrm.steady_state(sys)
    rep = affine.sigma_components(sys, split)
    rec = qrm.recombine(sys)
    payload = {
        "steady_state": [[[float(z.real), float(z.imag)] for z in row] for row in rho_plus],
        "ep": {
            "total": rep.total,
            "per_reservoir": list(rep.per_reservoir),
            "fluxes": list(rep.fluxes),
            "balance_residual": rep.balance_residual,
        },
        "gamma_total": rec.gamma_total,
        "detailed_balance": qrm.detailed_balance(sys),
    }
    return ScenarioResult(payload=payload)


SCENARIOS = {
    "single_qubit_ep_grid": _scenario_single_qubit_ep_grid,
    "affine_lambda_grid": _scenario_affine_lambda_grid,
    "lemma46_grid": _scenario_lemma46_grid,
    "tripartite_trace_distance": _scenario_tripartite_trace_distance,
    "tripartite_ep_remainder": _scenario_tripartite_ep_remainder,
    "tripartite_flux_sweep": _scenario_tripartite_flux_sweep,
    "assumptions_report": _scenario_assumptions_report,
    "custom_system": _scenario_custom_system,
}

_GRIDLESS = {"assumptions_report", "custom_system"}


def validate_config(raw: dict) -> ScenarioConfig:
    """Validate the parsed configuration, raising ConfigError with field paths."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    scenario = raw.get("scenario")
    if scenario not in SCENARIOS:
        raise ConfigError(
            f"scenario: expected one of {sorted(SCENARIOS)}, got {scenario!r}"
        )
    parameters = raw.get("parameters")
    if not isinstance(parameters, dict):
        raise ConfigError("parameters: expected an object")

    axes = []
    grid = raw.get("grid")
    if scenario in _GRIDLESS:
        if grid:
            raise ConfigError(f"grid: scenario {scenario!r} takes no grid")
    else:
        if not isinstance(grid, dict) or not isinstance(grid.get("axes"), list):
            raise ConfigError("grid.axes: expected a list of axis objects")
        raw_axes = grid["axes"]
        if not 1 <= len(raw_axes) <= 2:
            raise ConfigError(f"grid.axes: expected 1 or 2 axes, got {len(raw_axes)}")
        for i, ax in enumerate(raw_axes):
            where = f"grid.axes[{i}]"
            if not isinstance(ax, dict):
                raise ConfigError(f"{where}: expected an object")
            try:
                name = str(ax["name"])
                lo = float(ax["min"])
                hi = float(ax["max"])
                points = int(ax["points"])
            except KeyError as exc:
                raise ConfigError(f"{where}.{exc.args[0]}: missing field") from exc
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{where}: {exc}") from exc
            scale = str(ax.get("scale", "linear"))
            if scale not in ("linear", "log"):
                raise ConfigError(f"{where}.scale: expected 'linear' or 'log'")
            if points < 2:
                raise ConfigError(f"{where}.points: need at least 2, got {points}")
            if scale == "log" and (lo <= 0 or hi <= 0):
                raise ConfigError(f"{where}: log axes need positive bounds")
            axes.append(Axis(name, lo, hi, points, scale))

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output: expected an object")
    fmt = output.get("format", "json" if scenario in _GRIDLESS else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format: expected 'csv' or 'json', got {fmt!r}")
    if scenario in _GRIDLESS and fmt != "json":
        raise ConfigError(f"output.format: scenario {scenario!r} emits json only")
    path = str(output.get("path", "."))
    return ScenarioConfig(scenario, parameters, tuple(axes), fmt, path)


def run(cfg: ScenarioConfig, threads: int = 1) -> ScenarioResult:
    return SCENARIOS[cfg.scenario](cfg, threads)
