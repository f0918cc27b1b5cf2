"""Command-line entry point: one subcommand per experiment."""
from __future__ import annotations

import argparse
import logging
import time
from pathlib import Path
from typing import Callable, Sequence

from wallspde.core.errors import InsufficientDataError, NumericalBlowUpError, OrderingViolationError
from wallspde.data.config_loader import ConfigLoader, apply_overrides
from wallspde.data.errors import DataError
from wallspde.data.paths import get_output_dir
from wallspde.domain.defs import ExperimentConfig
from wallspde.domain.observables import default_observable_names, parse_observables
from wallspde.domain.reflected import run_reflected
from wallspde.services import coupling_service, ergodic_service, feller_service, obstacle_service
from wallspde.services import simulation_service
from wallspde.services.errors import AcceptanceError, ReplicaAbortedError
from wallspde.services.factories import Experiment, build_experiment
from wallspde.services.kernel_service import run_kernel_check
from wallspde.services.manifest import CheckResult, RunManifest

from .artifacts import ArtifactStore
from .render import configure_logging, render_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_ACCEPTANCE = 3

ORDER_TOLERANCE = 1e-10
TILT_TOLERANCE = 1e-10
KS_LIMIT = 0.1
MANIFEST_NAME = "manifest.json"

Handler = Callable[[Experiment, ArtifactStore, RunManifest], None]


def _kernel_check(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    report = run_kernel_check(experiment.grid, seed=experiment.master_seed)
    store.write_csv("kernel_check.csv", report.csv_header, report.csv_rows())
    manifest.checks.extend(CheckResult(row.check, row.passed, row.error, row.tolerance) for row in report.rows)
    manifest.summary.update(report.summary())


def _simulate(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    config = experiment.config
    record = simulation_service.simulate(
        experiment.initial(),
        experiment.walls,
        config.time.T,
        experiment.params,
        experiment.seeds(0),
        config.time.record_every,
    )
    store.write_csv("trajectory.csv", record.csv_header, record.csv_rows())
    manifest.summary.update(record.summary())
    if experiment.params.scheme == "projected":
        manifest.checks.append(
            CheckResult("walls_held", record.max_violation <= 1e-12, record.max_violation, 1e-12)
        )
    if experiment.replicas > 1:
        moments = simulation_service.moment_bound_check(
            experiment.initial(),
            experiment.walls,
            config.time.T,
            experiment.params,
            experiment.master_seed,
            experiment.replicas,
            experiment.threads,
            config.time.record_every,
        )
        manifest.aborted.update(moments.aborted)
        manifest.summary["replicas"] = moments.summary()
        if experiment.params.scheme == "projected":
            manifest.checks.append(
                CheckResult("sup_norm_bound", moments.passed, moments.summary()["max_sup_norm"], moments.bound)
            )


def _sweep(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    config = experiment.config
    block = config.sweep
    u0 = experiment.initial()
    seeds = experiment.seeds(0)
    T = config.time.T
    base = experiment.params.with_penalty(block.epsilon0, block.delta0)
    sweep = simulation_service.convergence_sweep(
        u0, experiment.walls, T, base, block.levels, seeds, block.tolerance, block.slack
    )
    store.write_csv("sweep.csv", sweep.csv_header, sweep.csv_rows())
    manifest.checks.append(CheckResult("sweep_nonincreasing", sweep.nonincreasing))
    manifest.checks.append(
        CheckResult("sweep_final_distance", sweep.distances[-1] <= block.tolerance, sweep.distances[-1], block.tolerance)
    )
    manifest.checks.append(
        CheckResult("delta_family_monotone", sweep.delta_orientation != "none", detail=sweep.delta_orientation)
    )

    penalized = run_reflected(u0, experiment.walls, T, experiment.params.with_scheme("penalized"), seeds)
    sandwich = simulation_service.sandwich_check(penalized, seeds)
    worst = max(sandwich.lower_violation, sandwich.upper_violation)
    manifest.checks.append(CheckResult("sandwich", sandwich.passed, worst, sandwich.tolerance))

    weak = simulation_service.weak_form_study(
        u0,
        experiment.walls,
        T,
        experiment.params.with_scheme("projected"),
        seeds,
        block.weak_form_halvings,
    )
    store.write_csv("weak_form.csv", weak.csv_header, weak.csv_rows())
    manifest.checks.append(CheckResult("weak_form_halving", weak.passed()))
    manifest.summary.update(
        {"sweep": sweep.summary(), "sandwich": sandwich.summary(), "weak_form": weak.summary()}
    )


def _obstacle_check(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    block = experiment.config.obstacle
    service = obstacle_service.ObstacleService(experiment)
    lipschitz = service.lipschitz()
    store.write_csv("obstacle.csv", lipschitz.csv_header, lipschitz.csv_rows())
    manifest.checks.append(
        CheckResult("lipschitz_factor", lipschitz.passed, lipschitz.max_ratio, block.bound)
    )
    composition = service.composition()
    manifest.checks.append(
        CheckResult("composition", composition.passed, composition.discrepancy, composition.tolerance)
    )
    manifest.summary.update({"lipschitz": lipschitz.summary(), "composition": composition.summary()})


def _couple(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    service = coupling_service.CouplingService(experiment)
    manifest.summary["coupling_params"] = service.params.to_payload()
    if experiment.config.coupling.general:
        general = service.general_study()
        manifest.aborted.update(general.aborted)
        manifest.checks.append(CheckResult("triangle_inequality", general.triangle_holds()))
        manifest.checks.append(CheckResult("coupling_probability_increasing", general.probabilities_increase()))
        manifest.summary["general"] = general.summary()
    else:
        study = service.ordered_study()
        manifest.aborted.update(study.aborted)
        store.write_csv("coupling.csv", study.csv_header, study.csv_rows())
        final = study.probabilities[-1]
        manifest.checks.append(CheckResult("coupling_probability_increasing", study.probabilities_increase()))
        manifest.checks.append(CheckResult("coupling_probability_final", final.probability >= 0.5, final.probability, 0.5))
        gap = study.min_order_gap()
        manifest.checks.append(CheckResult("ordering", gap >= -ORDER_TOLERANCE, gap, -ORDER_TOLERANCE))
        manifest.checks.append(CheckResult("mean_U_nonincreasing", study.u_nonincreasing()))
        manifest.checks.append(CheckResult("M_centered", study.m_centered()))
        try:
            qv = service.qv_report(study)
            manifest.checks.append(CheckResult("qv_lower_bound", qv.passed, qv.realized_q01, qv.c0_estimate))
            manifest.summary["qv"] = qv.summary()
        except InsufficientDataError as exc:
            manifest.checks.append(CheckResult("qv_lower_bound", False, detail=str(exc)))
        manifest.summary["coupling"] = study.summary()
    tilt = service.tilt_check()
    manifest.checks.append(CheckResult("tilt_round_trip", tilt <= TILT_TOLERANCE, tilt, TILT_TOLERANCE))


def _ergodic(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    config = experiment.config
    block = config.ergodic
    grid = experiment.grid
    names = block.observables or default_observable_names(grid)
    observables = parse_observables(names, grid)
    occupation, stability = ergodic_service.burn_in_stability(
        experiment.initial(),
        experiment.walls,
        block.horizon,
        config.time.burn_in,
        config.time.stride,
        observables,
        experiment.params,
        experiment.master_seed,
        experiment.replicas,
        experiment.threads,
    )
    store.write_csv("occupation.csv", occupation.csv_header, occupation.csv_rows())
    manifest.checks.append(
        CheckResult("burn_in_stability", stability.passed, max(stability.distances.values()), stability.null_band)
    )
    chains = ergodic_service.two_chain_tv_proxy(
        experiment.field(block.initial_a),
        experiment.field(block.initial_b),
        experiment.walls,
        tuple(block.t_list),
        observables,
        experiment.params,
        experiment.coupling_params(),
        experiment.master_seed,
        experiment.replicas,
        experiment.threads,
    )
    store.write_csv("two_chain.csv", chains.csv_header, chains.csv_rows())
    store.write_csv("two_chain_gap.csv", chains.gap_csv_header, chains.gap_rows())
    manifest.checks.append(CheckResult("ks_final", chains.final_ks() <= KS_LIMIT, chains.final_ks(), KS_LIMIT))
    manifest.checks.append(CheckResult("ks_nonincreasing", chains.ks_nonincreasing()))
    manifest.checks.append(CheckResult("gap_probability_nonincreasing", chains.gap_nonincreasing()))
    tightness = ergodic_service.tightness_stats(
        {name: experiment.field(name) for name in block.tightness_initials},
        experiment.walls,
        block.alpha,
        block.kappa,
        experiment.params,
        experiment.master_seed,
        experiment.replicas,
        experiment.threads,
        block.radius,
    )
    store.write_csv("tightness.csv", tightness.csv_header, tightness.csv_rows())
    manifest.checks.append(CheckResult("tightness_ratio", tightness.ratio() <= 2.0, tightness.ratio(), 2.0))
    manifest.summary.update(
        {
            "occupation": occupation.summary(),
            "burn_in_distances": stability.distances,
            "two_chain": chains.summary(),
            "tightness": tightness.summary(),
        }
    )


def _strong_feller(experiment: Experiment, store: ArtifactStore, manifest: RunManifest) -> None:
    config = experiment.config
    block = config.strong_feller
    service = feller_service.FellerService(experiment)
    study = service.ratio_study()
    store.write_csv("strong_feller.csv", study.csv_header, study.csv_rows())
    slope, _ = study.slope()
    manifest.checks.append(CheckResult("ratio_bounded", study.bounded(block.slope_limit), slope, block.slope_limit))

    derivative = config.derivative
    flow = service.derivative()
    store.write_csv("derivative.csv", flow.csv_header, flow.csv_rows())
    manifest.checks.append(
        CheckResult("finite_difference", flow.fd_relative_error <= derivative.fd_tolerance, flow.fd_relative_error, derivative.fd_tolerance)
    )
    manifest.checks.append(CheckResult("penalty_signs", flow.signs_hold, flow.max_dk, 0.0))
    manifest.summary.update({"strong_feller": study.summary(), "derivative": flow.summary()})


HANDLERS: dict[str, Handler] = {
    "kernel-check": _kernel_check,
    "simulate": _simulate,
    "sweep-penalization": _sweep,
    "obstacle-check": _obstacle_check,
    "couple": _couple,
    "ergodic": _ergodic,
    "strong-feller": _strong_feller,
}
CHECK_SUBCOMMANDS = ("kernel-check", "obstacle-check")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment configuration.")
    common.add_argument("--out", type=Path, help="Output directory (default: $WALLSPDE_OUTPUT_DIR/<subcommand>).")
    common.add_argument("--seed", type=int, help="Override seeds.master_seed.")
    common.add_argument("--replicas", type=int, help="Override seeds.replicas.")
    common.add_argument("--threads", type=int, help="Override seeds.threads.")
    parser = argparse.ArgumentParser(
        prog="wallspde", description="Stochastic heat equation on the circle between two reflecting walls."
    )
    subcommands = parser.add_subparsers(dest="subcommand", required=True)
    for name in HANDLERS:
        subcommands.add_parser(name, parents=[common])
    return parser


def load_experiment_config(
    config_path: Path | None,
    *,
    seed: int | None = None,
    replicas: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    loader = ConfigLoader()
    config = loader.load(config_path) if config_path is not None else loader.default()
    return apply_overrides(config, seed=seed, replicas=replicas, threads=threads)


def run(
    subcommand: str,
    config_path: Path | None = None,
    *,
    out: Path | None = None,
    seed: int | None = None,
    replicas: int | None = None,
    threads: int | None = None,
) -> int:
    """Run one subcommand, write its artifacts and manifest, and return the exit status."""
    handler = HANDLERS.get(subcommand)
    if handler is None:
        raise ValueError(f"Unknown subcommand '{subcommand}'.")
    try:
        config = load_experiment_config(config_path, seed=seed, replicas=replicas, threads=threads)
        experiment = build_experiment(config)
    except (DataError, ValueError) as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_VALIDATION

    store = ArtifactStore(out if out is not None else get_output_dir() / subcommand)
    manifest = RunManifest(subcommand=subcommand, config=config)
    logger.info(
        "Starting %s: n_x=%d dt=%g replicas=%d seed=%d",
        subcommand,
        config.grid.n_x,
        config.time.dt,
        config.seeds.replicas,
        config.seeds.master_seed,
    )
    started = time.perf_counter()
    status = EXIT_OK
    try:
        handler(experiment, store, manifest)
        if manifest.aborted:
            raise ReplicaAbortedError(manifest.aborted)
        failed = manifest.failed_checks()
        if failed:
            if subcommand in CHECK_SUBCOMMANDS:
                raise AcceptanceError(failed)
            logger.warning("Checks outside tolerance: %s", ", ".join(failed))
    except ReplicaAbortedError as exc:
        manifest.aborted.update(exc.failures)
        logger.error("%s", exc)
        status = EXIT_NUMERICAL
    except NumericalBlowUpError as exc:
        logger.error("Numerical failure: %s", exc)
        status = EXIT_NUMERICAL
    except OrderingViolationError as exc:
        logger.error("Coupled pair lost its order: %s", exc)
        status = EXIT_NUMERICAL
    except AcceptanceError as exc:
        logger.error("%s", exc)
        status = EXIT_ACCEPTANCE
    except (DataError, ValueError) as exc:
        logger.error("Invalid experiment: %s", exc)
        return EXIT_VALIDATION
    manifest.wall_clock_seconds = time.perf_counter() - started
    manifest.artifacts = store.written + [MANIFEST_NAME]
    store.write_json(MANIFEST_NAME, manifest.to_payload())
    render_manifest(manifest)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and run the chosen subcommand."""
    configure_logging()
    args = build_parser().parse_args(argv)
    return run(
        args.subcommand,
        args.config,
        out=args.out,
        seed=args.seed,
        replicas=args.replicas,
        threads=args.threads,
    )
