"""Command-line frontend: reproduces the paradox, game, tomography and visibility datasets.

Every command writes into its own run directory and closes it with manifest.json.
Exit codes: 0 success, 2 usage or invalid input, 3 numerical failure.
"""
import argparse
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from coherence import reported
from coherence.config import ExperimentConfig, get_settings
from coherence.errors import CoherenceError, InvalidParameterError
from coherence.expsim import (
    CLASSICAL_VISIBILITY_BOUND,
    correlator_from_counts,
    estimate_all,
    paradox_p_value,
    polarizer_angle_from_hwp,
    simulate_counts,
    simulate_paradox,
    stream_id,
    visibility_scan,
)
from coherence.game import STRATEGIES, quantum_strategy, winning_probability, winning_probability_from_correlators
from coherence.logging_config import setup_logging
from coherence.paradox import coherence_paradox, dicke_paradox, ghz_stabilizer_check, lhv_mixture_test
from coherence.qstate import epr_family, ghz_state, werner_mix
from coherence.reporting import RunDirectory
from coherence.tomo import density_csv_rows, prepared_states, tomography_report
from coherence.utils import format_angle, parse_angle, parse_angle_grid

logger = logging.getLogger(__name__)

MEASURED_ANGLES = (math.pi / 12, math.pi / 8, math.pi / 6, math.pi / 4)
CURVE_GRID = "linspace:pi/96:47pi/96:47"
SCAN_GRID = "linspace:0:pi:37"
COUNT_FIELDS = ["source", "observable", "u", "v", "a", "b", "trial", "count"]


def _angle(text: str) -> float:
    try:
        return parse_angle(text)
    except InvalidParameterError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _angle_grid(text: str) -> list[float]:
    try:
        return parse_angle_grid(text)
    except InvalidParameterError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _experiment_config(args: argparse.Namespace, **overrides) -> ExperimentConfig:
    """Config file (flag or COHERENCE_CONFIG_PATH) with CLI overrides; the seed falls back to COHERENCE_SEED."""
    settings = get_settings()
    seed = args.seed
    if seed is None and not (args.config or settings.config_path):
        seed = settings.seed
    return ExperimentConfig.resolve(args.config, seed=seed, **overrides)


def _open_run(args: argparse.Namespace, command: str, cfg: ExperimentConfig | None) -> RunDirectory:
    root = args.out or RunDirectory.default_root(get_settings().output_dir, command)
    arguments = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "handler"}
    return RunDirectory(
        root,
        command,
        arguments,
        config=cfg.model_dump() if cfg else {},
        seed=cfg.seed if cfg else None,
    )


# ---------------------------------------------------------------------------
# Dataset builders (shared by the single commands and ``report``)
# ---------------------------------------------------------------------------

def paradox_outputs(run: RunDirectory, prefix: str, theta: float, axis: str, mode: str, cfg: ExperimentConfig, tol: float) -> None:
    """Correlator table, spec, verdict and (simulated mode) counts and p-value."""
    spec = coherence_paradox(theta, axis)
    theory = spec.theoretical_observations()
    measured = reported.observed_paradox_values(theta, axis)
    rows = [
        {
            "source": c.source_label,
            "observable": c.observable,
            "theoretical": c.expected_value,
            "reported": measured[c.key] if measured else "",
        }
        for c in spec.constraints
    ]
    run.write_json(f"{prefix}spec.json", spec)
    run.write_json(f"{prefix}verdict_theoretical.json", lhv_mixture_test(spec, theory, tol))
    if measured:
        run.write_json(f"{prefix}verdict_reported.json", lhv_mixture_test(spec, measured, tol))

    if mode == "simulated":
        counts = simulate_paradox(spec, cfg)
        estimates = estimate_all(counts)
        for row, constraint in zip(rows, spec.constraints):
            estimate = estimates[constraint.key]
            row.update({
                "simulated": estimate.value,
                "std_err": estimate.std_err,
                "delta_std_err": estimate.delta_std_err,
                "n_total": estimate.n_total,
            })
        observed = {key: e.value for key, e in estimates.items()}
        run.write_json(f"{prefix}verdict_simulated.json", lhv_mixture_test(spec, observed, tol))
        run.write_json(f"{prefix}p_value.json", paradox_p_value(spec, counts))
        count_rows = []
        for (source, observable), table in counts.items():
            count_rows += [{"source": source, "observable": observable, **r} for r in table.to_records()]
        run.write_csv(f"{prefix}counts.csv", count_rows, COUNT_FIELDS)
    run.write_csv(f"{prefix}correlators.csv", rows)


def game_outputs(run: RunDirectory, name: str, grid: Sequence[float], strategy: str, mode: str, cfg: ExperimentConfig) -> None:
    """
    (theta, P_win, I_ab) rows, with simulated P_win from counts in simulated mode.

    The full P(a,b|x,y) table of every angle goes next to it as <name>_distribution.csv.
    """
    m_a, m_b = STRATEGIES[strategy]
    table = reported.GAME_P_WIN_X if strategy == "x" else reported.GAME_P_WIN_Z
    rows, distribution_rows = [], []
    for theta in grid:
        dist = quantum_strategy(theta, m_a, m_b)
        distribution_rows += [{"theta": theta, **r} for r in dist.to_records()]
        evaluation = winning_probability(dist)
        entry = reported.lookup(table, theta)
        row = {
            "theta": theta,
            "theta_label": format_angle(theta),
            "p_win": evaluation.p_win,
            "I_00": evaluation.i_terms["00"],
            "I_01": evaluation.i_terms["01"],
            "I_10": evaluation.i_terms["10"],
            "I_11": evaluation.i_terms["11"],
            "p_win_classical": 0.5,
            "reported_p_win": entry[0] if entry else "",
        }
        if mode == "simulated":
            estimates = []
            for label in ("00", "01", "10"):
                rho = werner_mix(epr_family(theta, label), cfg.visibility_v)
                counts = simulate_counts(
                    rho, (m_a.axis, m_b.axis), cfg, stream=stream_id("game", strategy, label, repr(theta))
                )
                estimates.append(correlator_from_counts(counts))
            p_win, std_err = winning_probability_from_correlators(
                *(e.value for e in estimates), std_errs=tuple(e.std_err for e in estimates)
            )
            row.update({"p_win_simulated": p_win, "p_win_std_err": std_err})
        rows.append(row)
    run.write_csv(name, rows)
    run.write_csv(f"{name.removesuffix('.csv')}_distribution.csv", distribution_rows)


def tomo_outputs(run: RunDirectory, prefix: str, states: dict, cfg: ExperimentConfig, visibilities: dict | None) -> None:
    rows, results = tomography_report(states, cfg, visibilities, bootstrap_replicates=cfg.bootstrap_replicates)
    run.write_csv(f"{prefix}fidelity.csv", rows)
    matrix_rows = []
    for label, result in results.items():
        matrix_rows += density_csv_rows(label, result.rho_hat.matrix)
    run.write_csv(f"{prefix}density_matrices.csv", matrix_rows)
    run.write_json(f"{prefix}density_matrices.json", {
        label: {"re": result.rho_hat.matrix.real, "im": result.rho_hat.matrix.imag, "clip_magnitude": result.clip_magnitude}
        for label, result in results.items()
    })


def dicke_outputs(run: RunDirectory, prefix: str, n: int, pairwise: bool) -> None:
    specs, rows = [], []
    for z in range(n):
        variants = [None]
        if pairwise:
            others = [k for k in range(n) if k != z]
            if len(others) >= 2:
                variants.append((others[0], others[1]))
        for x_pair in variants:
            spec = dicke_paradox(n, z, x_pair)
            verdict = lhv_mixture_test(spec, spec.theoretical_observations())
            specs.append(spec.model_dump())
            rows.append({
                "n": n,
                "z_position": z,
                "chain": spec.constraints[-1].observable,
                "final_value": spec.constraints[-1].expected_value,
                "lhv_feasible": verdict.lhv_feasible,
                "violation_gap": verdict.violation_gap,
            })
    run.write_json(f"{prefix}specs.json", specs)
    run.write_csv(f"{prefix}summary.csv", rows)


def visibility_outputs(run: RunDirectory, prefix: str, fixed: float, grid: Sequence[float], mode: str, cfg: ExperimentConfig) -> None:
    rho = werner_mix(epr_family(math.pi / 4, "00"), cfg.visibility_v)
    scan = visibility_scan(rho, fixed, grid, cfg, mode=mode, stream=stream_id("scan", repr(fixed)))
    run.write_csv(
        f"{prefix}scan.csv",
        [{"fixed_angle": fixed, "angle": a, "rate": r} for a, r in zip(scan.angles, scan.rates)],
    )
    run.write_json(f"{prefix}scan.json", scan)
    logger.info(
        f"Visibility at fixed {format_angle(fixed)}: V={scan.visibility:.4f} "
        f"({'above' if scan.exceeds_classical_bound else 'within'} classical bound {CLASSICAL_VISIBILITY_BOUND})"
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_paradox(args: argparse.Namespace) -> None:
    cfg = _experiment_config(args)
    run = _open_run(args, "paradox", cfg)
    paradox_outputs(run, "", args.theta, args.axis, args.mode, cfg, args.tol)
    run.finalize()


def cmd_game(args: argparse.Namespace) -> None:
    cfg = _experiment_config(args)
    run = _open_run(args, "game", cfg)
    game_outputs(run, "game.csv", args.theta_grid, args.strategy, args.mode, cfg)
    run.finalize()


def cmd_tomo(args: argparse.Namespace) -> None:
    visibilities = None
    visibility_override = None
    if args.visibility == "calibrated":
        visibilities = reported.calibrated_visibilities()
    elif args.visibility is not None:
        try:
            visibility_override = float(args.visibility)
        except ValueError:
            raise InvalidParameterError(f"--visibility must be a number or 'calibrated', got {args.visibility!r}") from None
    cfg = _experiment_config(args, visibility_v=visibility_override)
    if args.states == "all":
        states = prepared_states()
    else:
        states = {f"psi00({format_angle(theta)})": epr_family(theta, "00") for theta in parse_angle_grid(args.states)}
    run = _open_run(args, "tomo", cfg)
    tomo_outputs(run, "", states, cfg, visibilities)
    run.finalize()


def cmd_dicke(args: argparse.Namespace) -> None:
    run = _open_run(args, "dicke", None)
    dicke_outputs(run, "dicke_", args.n, args.pairwise)
    run.finalize()


def cmd_ghz(args: argparse.Namespace) -> None:
    run = _open_run(args, "ghz", None)
    run.write_json("ghz_verdict.json", ghz_stabilizer_check(ghz_state(3)))
    run.finalize()


def cmd_visibility(args: argparse.Namespace) -> None:
    cfg = _experiment_config(args, visibility_v=args.visibility)
    run = _open_run(args, "visibility", cfg)
    fixed = args.fixed if args.fixed_hwp is None else polarizer_angle_from_hwp(args.fixed_hwp)
    visibility_outputs(run, "", fixed, args.grid, args.mode, cfg)
    run.finalize()


def cmd_report(args: argparse.Namespace) -> None:
    """Regenerate every table and figure dataset under one manifest."""
    cfg = _experiment_config(args)
    run = _open_run(args, "report", cfg)
    for axis in ("X", "Y"):
        for theta in MEASURED_ANGLES:
            prefix = f"paradox/{axis.lower()}_{format_angle(theta).replace('/', '_')}_"
            paradox_outputs(run, prefix, theta, axis, "simulated", cfg, args.tol)
    for strategy in ("x", "z"):
        game_outputs(run, f"game/table_{strategy}.csv", MEASURED_ANGLES, strategy, "simulated", cfg)
        game_outputs(run, f"game/curve_{strategy}.csv", parse_angle_grid(CURVE_GRID), strategy, "exact", cfg)
    tomo_outputs(run, "tomography/", prepared_states(), cfg, reported.calibrated_visibilities())
    for fixed in (0.0, 3 * math.pi / 4):
        visibility_outputs(run, f"visibility/fixed_{format_angle(fixed).replace('/', '_')}_", fixed, parse_angle_grid(SCAN_GRID), "simulated", cfg)
    dicke_outputs(run, "dicke/n3_", 3, pairwise=False)
    run.write_json("ghz/verdict.json", ghz_stabilizer_check(ghz_state(3)))
    run.finalize()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coherence", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR (default from COHERENCE_LOG_LEVEL)")
    parser.add_argument("--log-file", type=Path, default=None, help="Mirror log records to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, experiment: bool = True) -> None:
        p.add_argument("--out", type=Path, default=None, help="Output directory (default: <output_dir>/<command>-<timestamp>)")
        if experiment:
            p.add_argument("--config", type=Path, default=None, help="KEY=value experiment config (default from COHERENCE_CONFIG_PATH)")
            p.add_argument("--seed", type=int, default=None, help="RNG seed overriding the config")

    p = sub.add_parser("paradox", help="Two-source coherence paradox table and LHV verdict")
    p.add_argument("--theta", type=_angle, default=math.pi / 4, help="Superposition angle, e.g. pi/12 or 0.26")
    p.add_argument("--axis", choices=("X", "Y"), type=str.upper, default="X")
    p.add_argument("--mode", choices=("exact", "simulated"), default="exact")
    p.add_argument("--tol", type=float, default=1e-10, help="Residual treated as LHV-reproducible")
    common(p)
    p.set_defaults(handler=cmd_paradox)

    p = sub.add_parser("game", help="Winning probability of the XOR coherence game")
    p.add_argument("--theta-grid", type=_angle_grid, default=list(MEASURED_ANGLES), help="Comma list or linspace:start:stop:num")
    p.add_argument("--strategy", choices=sorted(STRATEGIES), type=str.lower, default="x")
    p.add_argument("--mode", choices=("exact", "simulated"), default="exact")
    common(p)
    p.set_defaults(handler=cmd_game)

    p = sub.add_parser("tomo", help="Simulated state tomography of the prepared states")
    p.add_argument("--states", default="all", help="'all' or a comma list of superposition angles")
    p.add_argument("--visibility", default=None, help="Werner visibility, or 'calibrated' to match the measured fidelities")
    common(p)
    p.set_defaults(handler=cmd_tomo)

    p = sub.add_parser("dicke", help="Coherence paradoxes of the one-excitation Dicke state")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--pairwise", action="store_true", help="Also emit the two-X chains valid for every n")
    common(p, experiment=False)
    p.set_defaults(handler=cmd_dicke)

    p = sub.add_parser("ghz", help="GHZ stabilizer check against deterministic LHV assignments")
    common(p, experiment=False)
    p.set_defaults(handler=cmd_ghz)

    p = sub.add_parser("visibility", help="Polarizer fringe scan and visibility")
    fixed = p.add_mutually_exclusive_group()
    fixed.add_argument("--fixed", type=_angle, default=0.0, help="Path-I polarizer angle (0 or 3pi/4)")
    fixed.add_argument("--fixed-hwp", type=_angle, default=None, help="Path-I half-wave plate angle, acting as a polarizer at twice the angle")
    p.add_argument("--grid", type=_angle_grid, default=parse_angle_grid(SCAN_GRID))
    p.add_argument("--visibility", type=float, default=None, help="Werner visibility of the source")
    p.add_argument("--mode", choices=("exact", "simulated"), default="exact")
    common(p)
    p.set_defaults(handler=cmd_visibility)

    p = sub.add_parser("report", help="Regenerate every dataset under one manifest")
    p.add_argument("--tol", type=float, default=1e-10)
    common(p)
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, configure logging and run one command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.log_level, log_file=args.log_file)
    logger.info(f"Running coherence {args.command}")

    try:
        args.handler(args)
    except CoherenceError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0
