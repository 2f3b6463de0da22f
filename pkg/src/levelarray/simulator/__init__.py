"""Step-level simulation of renaming arrays under an oblivious adversary."""
from .checks import (
    CompactnessViolation,
    Violation,
    balance_report,
    check_collect_validity,
    check_conservation,
    check_uniqueness,
    compactness_violations,
    realized_compact_bound,
    report_from_occupancy,
)
from .engine import BalanceReport, BalanceTracker, ExecutionTrace, run_schedule
from .experiments import (
    HoldResult,
    ReachResult,
    hold_probability_experiment,
    one_shot_experiment,
    regularity_experiment,
    worst_balanced_fill,
)
from .healing import (
    HealingReport,
    Snapshot,
    convergence,
    inject_unbalanced_state,
    interval_indicators,
    parse_fill,
    run_healing_experiment,
)
from .schedule import (
    CALL,
    COLLECT,
    FREE,
    GET,
    CompactnessSpec,
    Schedule,
    SimConfig,
    dump_config,
    generate_compact_schedule,
    parse_config,
    round_robin_steps,
)

__all__ = [name for name in dir() if not name.startswith("_")]
