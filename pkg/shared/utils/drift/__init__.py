"""
Lernverfahren unter Concept Drift

Geometrie, Umgebungen und die drei Lerner. Konfiguration, Experimente und
Orakel liegen in `config_parser`, `experiment_runner` und `oracles`.
"""

from .active_disagreement import (
    ActiveConfig,
    VersionSpace,
    dis_membership,
    estimate_disagreement_coefficient,
    run_drifting_active,
)
from .environments import (
    DriftEnvironment,
    DriftSchedule,
    ScheduleKind,
    env_advance,
    make_random_walk_2d_env,
    make_rotating_halfspace_env,
    make_threshold_env,
)
from .geometry import (
    FiniteClass,
    band_probability,
    disagreement,
    hinge,
    log_cap,
    sample_unit_sphere,
)
from .halfspace_drift import (
    AblParameters,
    AblSchedule,
    abl_batch,
    hinge_minimize_ball,
    mod_perceptron_init,
    run_drifting_halfspaces,
)
from .window_erm import (
    AdaptiveConfig,
    AdaptiveWindowLearner,
    NonadaptiveWindowLearner,
    adaptive_fit,
    erm_halfspace_2d,
    erm_threshold,
    nonadaptive_window,
    run_passive_learner,
)

__all__ = [
    "ActiveConfig",
    "VersionSpace",
    "dis_membership",
    "estimate_disagreement_coefficient",
    "run_drifting_active",
    "DriftEnvironment",
    "DriftSchedule",
    "ScheduleKind",
    "env_advance",
    "make_random_walk_2d_env",
    "make_rotating_halfspace_env",
    "make_threshold_env",
    "FiniteClass",
    "band_probability",
    "disagreement",
    "hinge",
    "log_cap",
    "sample_unit_sphere",
    "AblParameters",
    "AblSchedule",
    "abl_batch",
    "hinge_minimize_ball",
    "mod_perceptron_init",
    "run_drifting_halfspaces",
    "AdaptiveConfig",
    "AdaptiveWindowLearner",
    "NonadaptiveWindowLearner",
    "adaptive_fit",
    "erm_halfspace_2d",
    "erm_threshold",
    "nonadaptive_window",
    "run_passive_learner",
]
