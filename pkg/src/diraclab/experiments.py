"""Experiment orchestration: run a validated config, emit CSV/JSON artifacts.

Every experiment is a pure function of its config and seed; artifact bytes
are reproducible (floats printed with 17 significant digits, '\n' endings,
sorted JSON keys).  The manifest lists each artifact with its SHA-256 digest
and carries the validity flags collected from the modules.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import belljump as bj
from .config import ExperimentConfig
from .errors import ConfigurationError
from .evolution import (
    box_potential,
    causality_check,
    evolve_free,
    fragility_scan,
    gaussian_well,
)
from .localization import (
    Region,
    min_localization,
    min_localization_unconstrained,
    newton_wigner_state,
    tail_decay_rate,
)
from .povm import build_indicator, build_projected_indicator, commutator_norm
from .spectral import (
    SimulationParams,
    SpinorField,
    make_positive_packet,
    negative_fraction,
    split_energy,
)


@dataclass(frozen=True)
class RunManifest:
    """Record of one experiment run: config echo, artifact digests, flags."""

    experiment: str
    parameters: dict
    seed: int
    artifacts: dict
    duration_seconds: float
    validity_flags: dict

    @property
    def all_valid(self) -> bool:
        return all(self.validity_flags.values())


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _jsonable(obj):
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    return obj


def _write_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _sim_params(p: dict) -> SimulationParams:
    return SimulationParams(
        mass=p["mass"], box_length=p["box_length"], grid_points=p["grid_points"]
    )


def fitted_time_step(total_time: float, dt_hint: float) -> float:
    """Largest step <= dt_hint that divides total_time evenly."""
    if total_time <= 0 or dt_hint <= 0:
        raise ConfigurationError("total_time and dt must be positive")
    n = max(1, int(np.ceil(total_time / dt_hint - 1e-12)))
    return total_time / n


def smooth_compact_bump(
    params: SimulationParams, radius: float, center: float = 0.0
) -> SpinorField:
    """Unit-norm upper-component bump, exactly zero outside |x - center| < radius."""
    if not (0 < radius < 0.5 * params.box_length):
        raise ConfigurationError(f"bump radius {radius} must lie in (0, L/2)")
    u = (params.positions - center) / radius
    inside = np.abs(u) < 1.0
    profile = np.zeros(params.grid_points)
    profile[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    values = np.zeros((params.grid_points, 2), dtype=complex)
    values[:, 0] = profile
    return SpinorField(values, params).normalize()


def gaussian_bump(
    params: SimulationParams, width: float, center: float = 0.0
) -> SpinorField:
    """Unit-norm upper-component Gaussian bump (full energy spectrum)."""
    profile = np.exp(-0.5 * ((params.positions - center) / width) ** 2)
    values = np.zeros((params.grid_points, 2), dtype=complex)
    values[:, 0] = profile
    return SpinorField(values, params).normalize()


def _run_tails(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    m = params.mass
    state = newton_wigner_state(params, p["center"])
    fit = tail_decay_rate(state, (p["window_lo"] / m, p["window_hi"] / m))
    mag = state.magnitude()
    _write_csv(
        outdir / "tail_profile.csv",
        ("x", "abs_psi", "log_abs_psi"),
        [
            (x, a, np.log(a) if a > 0 else float("-inf"))
            for x, a in zip(params.positions, mag)
        ],
    )
    _write_json(
        outdir / "tails.json",
        {
            "decay_rate": fit.decay_rate,
            "residual": fit.residual,
            "window": list(fit.window),
            "n_points": fit.n_points,
            "mass": m,
            "rate_over_mass": fit.decay_rate / m,
        },
    )
    return ["tail_profile.csv", "tails.json"], {}


def _run_project(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    bump = smooth_compact_bump(params, p["bump_radius"])
    split = split_energy(bump)
    plus_mag = split.plus.magnitude()
    _write_csv(
        outdir / "project_profile.csv",
        ("x", "abs_bump", "abs_plus", "abs_minus"),
        list(
            zip(
                params.positions,
                bump.magnitude(),
                plus_mag,
                split.minus.magnitude(),
            )
        ),
    )
    witness_ratio = float(plus_mag.min() / plus_mag.max())
    _write_json(
        outdir / "project.json",
        {
            "bump_radius": p["bump_radius"],
            "bump_negative_fraction": negative_fraction(bump),
            "plus_min_over_max": witness_ratio,
            "plus_nonzero_everywhere": witness_ratio > 1e-13,
        },
    )
    return ["project_profile.csv", "project.json"], {}


def _run_fragility(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    packet = make_positive_packet(
        params, center=0.0, width=p["packet_width"], momentum=p["packet_momentum"]
    )
    if p["shape"] == "box":
        shape = box_potential(params, 1.0, p["potential_center"], p["potential_half_width"])
    else:
        shape = gaussian_well(params, 1.0, p["potential_center"], p["potential_half_width"])
    dt = p["dt"] if p["dt"] > 0 else fitted_time_step(p["total_time"], 0.5 * params.dx)
    table = fragility_scan(packet, shape, p["strengths"], p["total_time"], dt)
    _write_csv(outdir / "fragility.csv", ("strength", "negative_fraction"), table)
    positive = [(v, f) for v, f in table if v > 0]
    slope = None
    if len(positive) >= 2:
        lv = np.log([v for v, _ in positive])
        lf = np.log([f for _, f in positive])
        slope = float(np.polyfit(lv, lf, 1)[0])
    _write_json(
        outdir / "fragility.json",
        {
            "shape": p["shape"],
            "dt": dt,
            "total_time": p["total_time"],
            "strengths": [v for v, _ in table],
            "fractions": [f for _, f in table],
            "loglog_slope": slope,
            "monotone": all(b[1] >= a[1] for a, b in zip(table, table[1:])),
        },
    )
    return ["fragility.csv", "fragility.json"], {}


def _run_causality(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    t = p["time"] if p["time"] > 0 else params.box_length / 8.0
    bump = gaussian_bump(params, p["bump_width"])
    report = causality_check(bump, t, p["eps_supp"])
    evolved = evolve_free(bump, t)
    plus = split_energy(bump).plus
    density = plus.magnitude() ** 2 * params.dx
    outside0 = float(
        density[np.abs(params.positions) > report.support_radius].sum() / density.sum()
    )
    _write_csv(
        outdir / "causality_profile.csv",
        ("x", "abs_initial", "abs_evolved", "abs_projected"),
        list(
            zip(
                params.positions,
                bump.magnitude(),
                evolved.magnitude(),
                plus.magnitude(),
            )
        ),
    )
    _write_json(
        outdir / "causality.json",
        {
            "support_radius": report.support_radius,
            "elapsed_time": report.elapsed_time,
            "threshold": report.threshold,
            "leaked_mass": report.leaked_mass,
            "within_horizon": report.within_horizon,
            "projected_outside_mass": outside0,
        },
    )
    return ["causality_profile.csv", "causality.json"], {
        "causality_horizon": report.within_horizon
    }


def _run_minloc(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    rows = []
    lambdas = []
    base_minimizer = None
    for factor in p["shrink_factors"]:
        half_width = p["region_half_width"] * factor
        region = Region.from_interval(params, -half_width, half_width)
        lam, minimizer = min_localization(region, params)
        rows.append((region.describe(params), half_width, lam))
        lambdas.append(lam)
        if base_minimizer is None:
            base_minimizer = minimizer
    base_region = Region.from_interval(
        params, -p["region_half_width"], p["region_half_width"]
    )
    unconstrained, _witness = min_localization_unconstrained(base_region, params)
    _write_csv(outdir / "minloc.csv", ("region", "half_width", "lambda_min"), rows)
    _write_csv(
        outdir / "minimizer_profile.csv",
        ("x", "abs_psi"),
        list(zip(params.positions, base_minimizer.magnitude())),
    )
    _write_json(
        outdir / "minloc.json",
        {
            "half_widths": [r[1] for r in rows],
            "lambda_min": lambdas,
            "unconstrained_min": unconstrained,
            "antitone": all(b > a for a, b in zip(lambdas, lambdas[1:])),
            "minimizer_negative_fraction": negative_fraction(base_minimizer),
        },
    )
    return ["minloc.csv", "minimizer_profile.csv", "minloc.json"], {}


def _run_commutator(p: dict, outdir: Path, seed: int):
    params = _sim_params(p)
    width = p["region_width"]
    kinds = ("indicator", "projected") if p["kind"] == "both" else (p["kind"],)
    rows = []
    projected_norms = []
    indicator_norms = []
    for gap in p["gaps"]:
        region_a = Region.from_interval(params, -gap / 2 - width, -gap / 2)
        region_b = Region.from_interval(params, gap / 2, gap / 2 + width)
        for kind in kinds:
            build = build_indicator if kind == "indicator" else build_projected_indicator
            report = commutator_norm(build(region_a, params), build(region_b, params))
            rows.append(
                (
                    region_a.describe(params),
                    region_b.describe(params),
                    gap,
                    report.commutator_norm,
                    report.operator_kind,
                )
            )
            if kind == "indicator":
                indicator_norms.append(report.commutator_norm)
            else:
                projected_norms.append(report.commutator_norm)
    _write_csv(
        outdir / "commutator.csv",
        ("region_a", "region_b", "gap", "comm_norm", "operator_kind"),
        rows,
    )
    _write_json(
        outdir / "commutator.json",
        {
            "gaps": list(p["gaps"]),
            "indicator_norms": indicator_norms,
            "projected_norms": projected_norms,
            "indicator_all_zero": all(n == 0.0 for n in indicator_norms),
            "projected_monotone_decreasing": all(
                b < a for a, b in zip(projected_norms, projected_norms[1:])
            ),
        },
    )
    return ["commutator.csv", "commutator.json"], {}


def _bell_lattice(p: dict) -> bj.LatticeConfig:
    return bj.LatticeConfig(
        sites=p["sites"],
        max_particles=p["n_max"],
        hopping=p["hopping"],
        coupling=p["coupling"],
        source_site=p["source_site"],
    )


def _config_label(cfg: tuple) -> str:
    return ";".join(str(s) for s in cfg)


def _run_belljump(p: dict, outdir: Path, seed: int):
    lattice = _bell_lattice(p)
    hamiltonian = bj.build_hamiltonian(lattice)
    psi0 = bj.schrodinger_step(bj.vacuum_state(lattice), hamiltonian, p["burn_time"])
    result = bj.equivariance_test(
        lattice, psi0, p["total_time"], p["dt"], p["n_trajectories"], seed
    )
    ens = result.ensemble
    configs = bj.configurations(lattice)
    _write_csv(
        outdir / "trajectories.csv",
        ("traj_id", "t_jump", "from_config", "to_config"),
        [
            (int(tr), t, _config_label(configs[s]), _config_label(configs[d]))
            for tr, t, s, d in zip(
                ens.event_trajectories, ens.event_times, ens.event_sources,
                ens.event_destinations,
            )
        ],
    )
    _write_csv(
        outdir / "histogram.csv",
        ("config", "empirical_p", "born_p"),
        [
            (_config_label(cfg), emp, born)
            for cfg, emp, born in zip(configs, result.empirical, result.born)
        ],
    )
    _write_json(
        outdir / "belljump.json",
        {
            "total_variation": result.total_variation,
            "sampling_envelope": result.sampling_envelope,
            "n_trajectories": p["n_trajectories"],
            "dt": p["dt"],
            "max_step_hazard": ens.max_step_hazard,
            "hazard_within_budget": ens.max_step_hazard < 0.1,
            "clipped_steps": ens.clipped_steps,
            "stranded": ens.stranded_count,
            "mean_jumps_per_trajectory": float(ens.jump_counts.mean()),
        },
    )
    return ["trajectories.csv", "histogram.csv", "belljump.json"], {}


def _run_jointclick(p: dict, outdir: Path, seed: int):
    region_a, region_b = tuple(p["region_a"]), tuple(p["region_b"])
    rows = []
    values = []
    initial_value = None
    for g in p["couplings"]:
        lattice = bj.LatticeConfig(
            sites=p["sites"],
            max_particles=p["n_max"],
            hopping=p["hopping"],
            coupling=g,
            source_site=p["source_site"],
        )
        hamiltonian = bj.build_hamiltonian(lattice)
        start = bj.single_particle_state(lattice, p["initial_site"])
        if initial_value is None:
            initial_value = bj.joint_region_probability(start, region_a, region_b)
        evolved = bj.schrodinger_step(start, hamiltonian, p["total_time"])
        value = bj.joint_region_probability(evolved, region_a, region_b)
        rows.append((g, value))
        values.append(value)
    _write_csv(outdir / "jointclick.csv", ("coupling", "joint_probability"), rows)
    _write_json(
        outdir / "jointclick.json",
        {
            "initial_joint_probability": initial_value,
            "couplings": list(p["couplings"]),
            "joint_probabilities": values,
            "monotone_in_coupling": all(b > a for a, b in zip(values, values[1:])),
        },
    )
    return ["jointclick.csv", "jointclick.json"], {}


_RUNNERS = {
    "tails": _run_tails,
    "project": _run_project,
    "fragility": _run_fragility,
    "causality": _run_causality,
    "minloc": _run_minloc,
    "commutator": _run_commutator,
    "belljump": _run_belljump,
    "jointclick": _run_jointclick,
}


def run_experiment(config: ExperimentConfig, output_dir: str | None = None) -> RunManifest:
    """Execute the experiment and write its artifacts plus manifest.json."""
    outdir = Path(output_dir if output_dir is not None else config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    artifact_names, flags = _RUNNERS[config.experiment](
        dict(config.parameters), outdir, config.seed
    )
    duration = time.perf_counter() - start
    digests = {name: _sha256(outdir / name) for name in artifact_names}
    manifest = RunManifest(
        experiment=config.experiment,
        parameters=dict(config.parameters),
        seed=config.seed,
        artifacts=digests,
        duration_seconds=duration,
        validity_flags=flags,
    )
    _write_json(
        outdir / "manifest.json",
        {
            "experiment": manifest.experiment,
            "parameters": manifest.parameters,
            "seed": manifest.seed,
            "artifacts": manifest.artifacts,
            "duration_seconds": manifest.duration_seconds,
            "validity_flags": manifest.validity_flags,
        },
    )
    return manifest
