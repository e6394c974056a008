"""
Experiment-Harness

Baut Umgebung und Lerner aus einer ExperimentConfig, führt alle Seeds aus
(optional parallel) und schreibt Trace-, Summary- und Sweep-Dateien.
"""

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import structlog

from shared.models.experiment import (
    SUMMARY_HEADER,
    EnvironmentKind,
    ExperimentConfig,
    LearnerKind,
    SummaryRow,
)
from shared.models.trace import RunTrace, format_float
from shared.utils.drift.active_disagreement import (
    ActiveConfig,
    drift_error_scale,
    run_drifting_active,
)
from shared.utils.drift.config_parser import (
    apply_overrides,
    config_digest,
    format_value,
    resolve_key,
)
from shared.utils.drift.environments import (
    DriftEnvironment,
    make_random_walk_2d_env,
    make_rotating_halfspace_env,
    make_threshold_env,
)
from shared.utils.drift.geometry import FiniteClass
from shared.utils.drift.halfspace_drift import AblParameters, AblSchedule, run_drifting_halfspaces
from shared.utils.drift.window_erm import (
    AdaptiveConfig,
    AdaptiveWindowLearner,
    ErmOracle,
    Halfspace2DErm,
    NonadaptiveWindowLearner,
    ThresholdErm,
    WindowLearner,
    nonadaptive_window,
    run_passive_learner,
)
from shared.utils.errors import ConfigValidationError, ExperimentIOError
from shared.utils.file_utils import artifact_path, ensure_writable_dir

logger = structlog.get_logger()

SWEEP_HEADER = [
    "axis", "value", "seed", "mistakes", "queries", "mistake_rate", "final_rate", "mean_error"
]


def build_environment(cfg: ExperimentConfig, seed: int) -> DriftEnvironment:
    env_cfg = cfg.environment
    schedule = env_cfg.build_schedule()
    if env_cfg.kind == EnvironmentKind.THRESHOLD:
        return make_threshold_env(schedule, seed)
    if env_cfg.kind == EnvironmentKind.RANDOM_WALK:
        return make_random_walk_2d_env(schedule, env_cfg.support(), seed)
    return make_rotating_halfspace_env(
        env_cfg.resolved_dimension(), schedule, seed, fixed_direction=env_cfg.fixed_direction
    )


def build_erm(cfg: ExperimentConfig) -> ErmOracle:
    if cfg.environment.kind == EnvironmentKind.THRESHOLD:
        return ThresholdErm()
    return Halfspace2DErm()


def adaptive_config(cfg: ExperimentConfig) -> AdaptiveConfig:
    win = cfg.window
    return AdaptiveConfig(
        K=win.K,
        confidence=win.confidence,
        d=win.vc_dim if win.vc_dim is not None else cfg.environment.resolved_dimension(),
        confidence_schedule=win.confidence_schedule,
        max_window=win.max_window,
    )


def build_window_learner(cfg: ExperimentConfig) -> WindowLearner:
    erm = build_erm(cfg)
    if cfg.learner.kind == LearnerKind.NONADAPTIVE:
        d = adaptive_config(cfg).d
        return NonadaptiveWindowLearner(cfg.environment.build_schedule(), erm, d)
    return AdaptiveWindowLearner(adaptive_config(cfg), erm)


def abl_schedule(cfg: ExperimentConfig) -> AblSchedule:
    hs = cfg.halfspaces
    params = AblParameters(
        d=cfg.environment.resolved_dimension(),
        drift=cfg.environment.delta,
        confidence=hs.confidence,
        kappa=hs.kappa,
        c5=hs.c5,
        c7=hs.c7,
        c8=hs.c8,
        c9=hs.c9,
        c10=hs.c10,
        m0=hs.m0,
        alpha_static=hs.alpha_static,
        budget=hs.budget,
        theoretical=hs.theoretical,
        last_index=hs.last_index,
    )
    return AblSchedule.from_parameters(params)


def active_config(cfg: ExperimentConfig) -> ActiveConfig:
    return ActiveConfig(
        d=cfg.environment.resolved_dimension(),
        drift=cfg.environment.delta,
        c1=cfg.active.c1,
        grid_size=cfg.active.grid_size,
    )


def build_hypothesis_class(cfg: ExperimentConfig) -> FiniteClass:
    if cfg.environment.kind == EnvironmentKind.THRESHOLD:
        return FiniteClass.threshold_grid(cfg.active.grid_size)
    return FiniteClass.angle_grid(cfg.active.grid_size)


def run_single(cfg: ExperimentConfig, seed: int) -> RunTrace:
    """Ein Lauf für einen Seed; deterministisch in (cfg, seed)."""
    env = build_environment(cfg, seed)
    T = cfg.experiment.horizon
    kind = cfg.learner.kind
    if kind == LearnerKind.DRIFTING_HALFSPACES:
        return run_drifting_halfspaces(env, T, abl_schedule(cfg))
    if kind == LearnerKind.DRIFTING_ACTIVE:
        return run_drifting_active(env, T, active_config(cfg), build_hypothesis_class(cfg))
    return run_passive_learner(env, T, build_window_learner(cfg))


def _run_seed(args: tuple) -> RunTrace:
    cfg, seed = args
    return run_single(cfg, seed)


@dataclass
class ExperimentResult:
    """Traces und Zusammenfassung eines Experiments"""
    digest: str
    traces: Dict[int, RunTrace] = field(default_factory=dict)
    summary: List[SummaryRow] = field(default_factory=list)
    trace_paths: Dict[int, Path] = field(default_factory=dict)
    summary_path: Optional[Path] = None

    def mean_mistake_rate(self) -> float:
        return float(np.mean([t.mistake_rate() for t in self.traces.values()]))


def write_summary(path: Path, rows: Sequence[SummaryRow]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow(row.to_row())
    return path


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentResult:
    """
    Führt alle Seeds einer Konfiguration aus

    Das Ausgabeverzeichnis wird vor jeder Rechnung geprüft.

    Args:
        cfg: Validierte Konfiguration
        write: Trace- und Summary-Dateien schreiben

    Returns:
        ExperimentResult mit Traces in Seed-Reihenfolge

    Raises:
        ConfigValidationError: Bei unverträglicher Umgebung/Lerner-Kombination
        ExperimentIOError: Wenn das Ausgabeverzeichnis nicht beschreibbar ist
    """
    cfg.check_compatibility()
    out_dir = ensure_writable_dir(cfg.experiment.output_dir) if write else None
    digest = config_digest(cfg)
    seeds = list(cfg.experiment.seeds)
    run_logger = logger.bind(digest=digest, learner=cfg.learner.kind.value)
    run_logger.info("experiment_started", seeds=seeds, horizon=cfg.experiment.horizon)

    workers = min(cfg.experiment.workers, len(seeds))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_run_seed, [(cfg, seed) for seed in seeds]))
    else:
        traces = [run_single(cfg, seed) for seed in seeds]

    result = ExperimentResult(digest=digest)
    for seed, trace in zip(seeds, traces):
        result.traces[seed] = trace
        result.summary.append(
            SummaryRow.from_trace(digest, seed, trace, cfg.experiment.final_fraction)
        )

    if out_dir is not None:
        try:
            for seed, trace in result.traces.items():
                path = artifact_path(out_dir, f"trace_{digest}_seed{seed}.csv")
                result.trace_paths[seed] = trace.write_csv(path)
            result.summary_path = write_summary(
                artifact_path(out_dir, f"summary_{digest}.csv"), result.summary
            )
        except OSError as e:
            raise ExperimentIOError(f"Ergebnisse nicht schreibbar: {e}")
    run_logger.info(
        "experiment_finished",
        mean_mistake_rate=round(result.mean_mistake_rate(), 6),
        output_dir=str(out_dir) if out_dir else None,
    )
    return result


@dataclass
class SweepResult:
    """Lange Tabelle eines Parameter-Sweeps"""
    axis: str
    rows: List[List[str]] = field(default_factory=list)
    csv_path: Optional[Path] = None
    plot_path: Optional[Path] = None


def _check_numeric_axis(cfg: ExperimentConfig, section: str, key: str) -> None:
    annotation = type(getattr(cfg, section)).model_fields[key].annotation
    allowed = {int, float, Optional[int], Optional[float]}
    if annotation not in allowed:
        raise ConfigValidationError(key, "Sweep-Achse muss numerisch sein", section)


def sweep(
    cfg: ExperimentConfig, axis: str, values: Sequence[float], plot: bool = False
) -> SweepResult:
    """
    Variiert einen numerischen Schlüssel über `values` × alle Seeds

    Args:
        cfg: Vorlage
        axis: "abschnitt.schlüssel" oder eindeutiger Schlüssel
        values: Achsenwerte
        plot: Zusätzlich ein SVG mit Mittelwert und Min/Max der Fehlerrate

    Raises:
        ConfigValidationError: Bei leerer Werteliste, unbekannter oder nicht numerischer Achse
    """
    if len(values) == 0:
        raise ConfigValidationError("values", "Sweep braucht mindestens einen Wert")
    section, key = resolve_key(cfg, axis)
    _check_numeric_axis(cfg, section, key)
    out_dir = ensure_writable_dir(cfg.experiment.output_dir)
    digest = config_digest(cfg)
    axis_name = f"{section}.{key}"

    variants = [(value, apply_overrides(cfg, {axis_name: value})) for value in values]

    result = SweepResult(axis=axis_name)
    for value, variant in variants:
        run = run_experiment(variant)
        for seed, trace in run.traces.items():
            result.rows.append(
                [
                    axis_name,
                    format_value(value),
                    str(seed),
                    str(trace.total_mistakes),
                    str(trace.total_queries),
                    format_float(trace.mistake_rate()),
                    format_float(trace.final_rate(variant.experiment.final_fraction)),
                    format_float(trace.mean_error()),
                ]
            )

    result.csv_path = artifact_path(out_dir, f"sweep_{digest}_{axis_name}.csv")
    with open(result.csv_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        writer.writerows(result.rows)
    if plot:
        result.plot_path = plot_sweep(
            result, artifact_path(out_dir, f"sweep_{digest}_{axis_name}.svg")
        )
    logger.info("sweep_finished", axis=axis_name, values=len(values), csv=str(result.csv_path))
    return result


def plot_sweep(result: SweepResult, path: Path) -> Path:
    """Mittlere Fehlerrate je Achsenwert mit Min/Max-Whiskern."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    grouped: Dict[float, List[float]] = {}
    for row in result.rows:
        grouped.setdefault(float(row[1]), []).append(float(row[5]))
    xs = sorted(grouped)
    means = np.array([np.mean(grouped[x]) for x in xs])
    lows = means - np.array([min(grouped[x]) for x in xs])
    highs = np.array([max(grouped[x]) for x in xs]) - means

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(xs, means, yerr=[lows, highs], marker="o", capsize=3)
    if xs[0] > 0 and xs[-1] / xs[0] >= 10:
        ax.set_xscale("log")
    ax.set_xlabel(result.axis)
    ax.set_ylabel("mistake rate")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    return path


def describe_schedule(cfg: ExperimentConfig) -> str:
    """Aufgelöste Parameter des gewählten Lerners als "schlüssel = wert"-Zeilen."""
    cfg.check_compatibility()
    lines = [f"learner = {cfg.learner.kind.value}", f"digest = {config_digest(cfg)}"]
    kind = cfg.learner.kind
    if kind == LearnerKind.DRIFTING_HALFSPACES:
        return "\n".join(lines) + "\n" + abl_schedule(cfg).to_text()
    if kind == LearnerKind.DRIFTING_ACTIVE:
        active = active_config(cfg)
        lines += [
            f"M = {active.M}",
            f"epochs = {active.epochs}",
            f"epsilon_drift = {drift_error_scale(active.d, active.drift)}",
        ]
        lines += [f"T_{k} = {active.threshold(k)}" for k in range(active.epochs)]
        return "\n".join(lines) + "\n"
    acfg = adaptive_config(cfg)
    lines += [
        f"K = {acfg.K}",
        f"confidence = {acfg.confidence_at(cfg.experiment.horizon)}",
        f"vc_dim = {acfg.d}",
        f"max_window = {format_value(acfg.max_window)}",
    ]
    if kind == LearnerKind.NONADAPTIVE and cfg.experiment.horizon >= 2:
        window = nonadaptive_window(
            cfg.environment.build_schedule(), cfg.experiment.horizon, acfg.d
        )
        lines.append(f"window_at_T = {window}")
    return "\n".join(lines) + "\n"
