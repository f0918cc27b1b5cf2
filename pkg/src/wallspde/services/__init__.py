"""Service layer orchestrating runs, studies and replica batches."""

from .coupling_service import (
    CouplingService,
    CouplingStudy,
    GeneralCouplingStudy,
    QvReport,
    coupling_study,
    qv_lower_bound_check,
)
from .ergodic_service import (
    OccupationSummary,
    TightnessReport,
    TwoChainReport,
    occupation_measure,
    tightness_stats,
    two_chain_tv_proxy,
)
from .errors import AcceptanceError, ReplicaAbortedError
from .factories import Experiment, build_experiment, build_params
from .feller_service import (
    DerivativeReport,
    FellerService,
    StrongFellerReport,
    derivative_report,
    strong_feller_study,
)
from .kernel_service import KernelCheckReport, run_kernel_check
from .manifest import CheckResult, RunManifest
from .obstacle_service import (
    CompositionReport,
    LipschitzReport,
    ObstacleService,
    continuity_composition_check,
    lipschitz_study,
)
from .replica_runner import ReplicaBatch, ReplicaOutcome, run_replicas
from .simulation_service import (
    SandwichReport,
    SweepReport,
    WeakFormStudy,
    convergence_sweep,
    sandwich_check,
    simulate,
    unreflected_reference,
    weak_form_residual,
    weak_form_study,
)

__all__ = [
    "AcceptanceError",
    "CheckResult",
    "CompositionReport",
    "CouplingService",
    "CouplingStudy",
    "DerivativeReport",
    "Experiment",
    "FellerService",
    "GeneralCouplingStudy",
    "KernelCheckReport",
    "LipschitzReport",
    "ObstacleService",
    "OccupationSummary",
    "QvReport",
    "ReplicaAbortedError",
    "ReplicaBatch",
    "ReplicaOutcome",
    "RunManifest",
    "SandwichReport",
    "StrongFellerReport",
    "SweepReport",
    "TightnessReport",
    "TwoChainReport",
    "WeakFormStudy",
    "build_experiment",
    "build_params",
    "continuity_composition_check",
    "convergence_sweep",
    "coupling_study",
    "derivative_report",
    "lipschitz_study",
    "occupation_measure",
    "qv_lower_bound_check",
    "run_kernel_check",
    "run_replicas",
    "sandwich_check",
    "simulate",
    "strong_feller_study",
    "tightness_stats",
    "two_chain_tv_proxy",
    "unreflected_reference",
    "weak_form_residual",
    "weak_form_study",
]
