"""Command-line interface module for signalscope.

This module provides the `signalscope` command with four subcommands:

- detect: run the protocol once and report whether the machine signals
- sweep:  run the protocol over grids of overlaps and fidelity excesses
- oracle: compare the cone-formula optimum with both brute-force searches
- plan:   print the probe preparation numbers for one overlap

Documents go to stdout (or --output), diagnostics to stderr. Exit codes: 0 for
success without signaling, 2 when detect sees signaling, 1 on any error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

from colorama import Fore
from colorama import Style
from colorama import just_fix_windows_console

from .config import ConfigManager
from .machines import DegenerateGeometryError
from .machines import MachineKind
from .machines import anchor_states
from .machines import cone_geometry
from .machines import machine_by_fidelity_excess
from .machines import max_fidelity_excess
from .machines import optimal_fidelity_for_overlap
from .machines import qubit_pair_from_overlap
from .optimizer import SearchError
from .optimizer import filter_search
from .optimizer import gram_constrained_max
from .optimizer import unitary_search
from .report import SWEEP_COLUMNS
from .report import emit
from .report import new_document
from .report import to_csv
from .report import to_json
from .signaling import build_probe
from .signaling import plan_experiment
from .signaling import run_protocol
from .signaling import sweep

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SIGNALING = 2

ORACLE_AGREEMENT = 1e-6

DETECT_COLUMNS = [
    "kind",
    "s",
    "epsilon",
    "theta_prime",
    "machine_fidelity",
    "optimal_fidelity",
    "entropy_before",
    "entropy_after",
    "delta",
    "threshold",
    "signaling",
    "overlap_before",
    "overlap_after",
]
ORACLE_COLUMNS = [
    "kind",
    "s",
    "cone_fidelity",
    "gram_fidelity",
    "unitary_fidelity",
    "max_discrepancy",
    "best_found",
]
PLAN_COLUMNS = ["kind", "s", "schmidt_a2", "target_entropy", "filter_success_probability"]


class UsageError(ValueError):
    """Raised for invalid command-line input."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    """Parsed command-line configuration.

    Attributes:
        command (str): detect, sweep, oracle or plan.
        kind (MachineKind): Clone or delete.
        overlaps (List[float]): Overlap values, ascending.
        epsilons (List[float]): Fidelity excesses, ascending.
        epsilon_max (bool): Use the exact machine (epsilon = 1 - F_optimal).
        threshold (float): Signaling threshold in bits.
        seed (int): Search seed.
        output_format (str): json or csv.
        output_path (Optional[str]): Where to write the document; stdout when None.
        restarts (Optional[int]): Restart count override for oracle searches.
        dim (int): Unitary dimension for the oracle.
        verify_filter (bool): Confirm the filter probability by search (plan).
    """

    command: str
    kind: MachineKind
    overlaps: List[float]
    epsilons: List[float]
    epsilon_max: bool
    threshold: float
    seed: int
    output_format: str = "json"
    output_path: Optional[str] = None
    restarts: Optional[int] = None
    dim: int = 4
    verify_filter: bool = False


def parse_grid(text: str) -> List[float]:
    """Parse "start:stop:step" (stop included), "a,b,c" or a single value.

    Raises:
        UsageError: If the grid is malformed, empty or not ascending.
    """
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise UsageError(f"Grid {text!r} must be start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise UsageError(f"Grid {text!r} must have step > 0 and stop >= start")
            count = int((stop - start) / step + 1e-9) + 1
            values = [round(start + k * step, 12) for k in range(count)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        if isinstance(e, UsageError):
            raise
        raise UsageError(f"Invalid grid {text!r}: {e}")
    if not values:
        raise UsageError(f"Grid {text!r} is empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError(f"Grid {text!r} is not ascending")
    return values


def _single(values: List[float], name: str) -> float:
    if len(values) != 1:
        raise UsageError(f"--{name} takes a single value for this command")
    return values[0]


def _verdict(message: str, color: str) -> None:
    if sys.stderr.isatty():
        message = f"{color}{message}{Style.RESET_ALL}"
    print(message, file=sys.stderr)


def _finish(config: RunConfig, document: Dict, columns: Sequence[str], rows: List[Dict]) -> None:
    if config.output_format == "csv":
        emit(to_csv(columns, rows), config.output_path)
    else:
        emit(to_json(document), config.output_path)


def cmd_detect(config: RunConfig) -> int:
    """Run the protocol once; exit 2 if signaling is detected."""
    s = _single(config.overlaps, "overlap")
    pair = qubit_pair_from_overlap(s)
    geometry = cone_geometry(pair, config.kind)
    if config.epsilon_max:
        epsilon = max_fidelity_excess(geometry)
    else:
        epsilon = _single(config.epsilons, "epsilon")
    machine = machine_by_fidelity_excess(geometry, epsilon)
    report = run_protocol(build_probe(pair, config.kind), machine, config.threshold)

    row = dict(report.to_dict(), epsilon=epsilon)
    document = new_document(
        "detect", kind=config.kind.value, s=s, epsilon=epsilon, report=report.to_dict()
    )
    _finish(config, document, DETECT_COLUMNS, [row])

    if report.signaling:
        _verdict(f"Signaling detected: delta = {report.delta:+.6g} bits", Fore.RED)
        return EXIT_SIGNALING
    _verdict(f"No signaling: delta = {report.delta:+.6g} bits", Fore.GREEN)
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    """Emit the sweep table for the overlap and epsilon grids."""
    if not config.epsilons:
        raise UsageError("sweep needs an --epsilon grid")
    records = sweep(config.kind, config.overlaps, config.epsilons, config.threshold)
    rows = [record.to_dict() for record in records]
    document = new_document(
        "sweep", kind=config.kind.value, threshold=config.threshold, records=rows
    )
    _finish(config, document, SWEEP_COLUMNS, rows)

    infeasible = sum(1 for r in records if not r.feasible)
    if infeasible:
        _verdict(f"{infeasible} of {len(records)} cells infeasible", Fore.YELLOW)
    return EXIT_OK


def cmd_oracle(config: RunConfig, manager: Optional[ConfigManager] = None) -> int:
    """Compare cone-formula, Gram-constrained and unitary-search optima."""
    manager = manager or ConfigManager()
    search = manager.get_search_config(seed=config.seed, restarts=config.restarts)
    rows = []
    status = EXIT_OK
    for s in config.overlaps:
        pair = qubit_pair_from_overlap(s)
        inputs, targets = anchor_states(pair, config.kind)
        cone = optimal_fidelity_for_overlap(s, config.kind)
        try:
            gram, _ = gram_constrained_max(targets, inputs.overlap, search)
            unitary = unitary_search(inputs, targets, config.dim, search).fidelity
        except SearchError as e:
            logger.error(f"Oracle search failed at s={s}: {e}")
            _verdict(f"Search failed at s={s}; best value found {e.best_value!r}", Fore.RED)
            rows.append(
                {
                    "kind": config.kind.value,
                    "s": s,
                    "cone_fidelity": cone,
                    "gram_fidelity": None,
                    "unitary_fidelity": None,
                    "max_discrepancy": None,
                    "best_found": e.best_value,
                }
            )
            status = EXIT_ERROR
            continue
        discrepancy = max(abs(cone - gram), abs(cone - unitary), abs(gram - unitary))
        rows.append(
            {
                "kind": config.kind.value,
                "s": s,
                "cone_fidelity": cone,
                "gram_fidelity": gram,
                "unitary_fidelity": unitary,
                "max_discrepancy": discrepancy,
                "best_found": None,
            }
        )
        if discrepancy >= ORACLE_AGREEMENT:
            status = EXIT_ERROR

    discrepancies = [r["max_discrepancy"] for r in rows if r["max_discrepancy"] is not None]
    document = new_document(
        "oracle",
        kind=config.kind.value,
        seed=search.seed,
        restarts=search.restarts,
        dim=config.dim,
        rows=rows,
        max_discrepancy=max(discrepancies) if discrepancies else None,
        agreement=status == EXIT_OK,
    )
    _finish(config, document, ORACLE_COLUMNS, rows)

    if status == EXIT_OK:
        _verdict(f"All oracles agree within {ORACLE_AGREEMENT:g}", Fore.GREEN)
    else:
        _verdict("Oracles disagree or a search failed", Fore.RED)
    return status


def cmd_plan(config: RunConfig, manager: Optional[ConfigManager] = None) -> int:
    """Print Schmidt weight, target entropy and filtering probability."""
    s = _single(config.overlaps, "overlap")
    plan = plan_experiment(qubit_pair_from_overlap(s), config.kind)
    fields = plan.to_dict()
    if config.verify_filter:
        manager = manager or ConfigManager()
        search = manager.get_search_config(seed=config.seed, restarts=config.restarts)
        fields["filter_search_probability"] = filter_search(plan.schmidt_a2, search).probability
    document = new_document("plan", **fields)
    columns = PLAN_COLUMNS + (["filter_search_probability"] if config.verify_filter else [])
    _finish(config, document, columns, [fields])
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "detect": cmd_detect,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "plan": cmd_plan,
}


def build_parser(default_threshold: float) -> argparse.ArgumentParser:
    """Argument parser for all subcommands."""
    parser = _ArgumentParser(
        prog="signalscope",
        description="signalscope - signaling tests of super-quantum cloning and deleting",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    common = _ArgumentParser(add_help=False)
    common.add_argument("--kind", choices=[k.value for k in MachineKind], default="clone")
    common.add_argument(
        "--threshold",
        type=float,
        default=default_threshold,
        help="Signaling threshold on |delta| in bits",
    )
    common.add_argument("--seed", type=int, help="Search seed (default: $SIGNALSCOPE_SEED or 0)")
    common.add_argument("--format", dest="output_format", choices=["json", "csv"], default="json")
    common.add_argument("--output", dest="output_path", metavar="PATH", help="Write the document here")

    detect = subparsers.add_parser("detect", parents=[common], help="Run the protocol once")
    detect.add_argument("--overlap", required=True, help="Anchor overlap s in [0, 1]")
    group = detect.add_mutually_exclusive_group()
    group.add_argument("--epsilon", default="0", help="Fidelity excess over the quantum optimum")
    group.add_argument(
        "--epsilon-max", action="store_true", help="Use the exact machine (epsilon = 1 - F_optimal)"
    )

    sweep_parser = subparsers.add_parser("sweep", parents=[common], help="Sweep (s, epsilon) grids")
    sweep_parser.add_argument("--overlap", required=True, help="Grid: start:stop:step or a,b,c")
    sweep_parser.add_argument("--epsilon", required=True, help="Grid: start:stop:step or a,b,c")

    oracle = subparsers.add_parser("oracle", parents=[common], help="Cross-check optimal fidelity")
    oracle.add_argument("--overlap", required=True, help="Grid: start:stop:step or a,b,c")
    oracle.add_argument("--restarts", type=int, help="Random restarts per search (default 32)")
    oracle.add_argument("--dim", type=int, default=4, help="Unitary dimension (default 4)")

    plan = subparsers.add_parser("plan", parents=[common], help="Probe preparation numbers")
    plan.add_argument("--overlap", required=True, help="Anchor overlap s in [0, 1]")
    plan.add_argument(
        "--verify-filter",
        action="store_true",
        help="Confirm the filter probability by numerical search",
    )
    plan.add_argument("--restarts", type=int, help="Random restarts for --verify-filter")
    return parser


def parse_config(argv: Optional[Sequence[str]], manager: ConfigManager) -> RunConfig:
    """Parse argv into a RunConfig.

    Raises:
        UsageError: On any invalid flag or value.
    """
    args = build_parser(manager.get_default_threshold()).parse_args(argv)
    overlaps = parse_grid(args.overlap)
    if any(not 0.0 <= s <= 1.0 for s in overlaps):
        raise UsageError(f"Overlap values must lie in [0, 1], got {args.overlap!r}")
    epsilon_text = getattr(args, "epsilon", None)
    epsilons = parse_grid(epsilon_text) if epsilon_text is not None else []
    if any(e < 0 for e in epsilons):
        raise UsageError(f"Epsilon values must be nonnegative, got {epsilon_text!r}")
    if args.threshold < 0:
        raise UsageError(f"Threshold must be nonnegative, got {args.threshold!r}")
    dim = getattr(args, "dim", 4)
    if not 4 <= dim <= 8:
        raise UsageError(f"--dim must be between 4 and 8, got {dim}")

    return RunConfig(
        command=args.command,
        kind=MachineKind(args.kind),
        overlaps=overlaps,
        epsilons=epsilons,
        epsilon_max=getattr(args, "epsilon_max", False),
        threshold=args.threshold,
        seed=manager.get_seed(args.seed),
        output_format=args.output_format,
        output_path=args.output_path,
        restarts=getattr(args, "restarts", None),
        dim=dim,
        verify_filter=getattr(args, "verify_filter", False),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point for the signalscope command-line tool.

    Environment variables:
    SIGNALSCOPE_SEED: Default search seed; --seed overrides it.
    DEBUG: Set to 1 for debug logging on stderr.

    Returns:
        int: Exit code (0 ok, 2 signaling detected, 1 error).
    """
    just_fix_windows_console()
    try:
        manager = ConfigManager()
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR

    log_level = logging.DEBUG if manager.is_debug() else logging.WARNING
    logging.basicConfig(level=log_level, format="%(asctime)s - %(levelname)s - %(message)s")

    try:
        config = parse_config(argv, manager)
    except UsageError as e:
        print(f"Usage error: {e}", file=sys.stderr)
        return EXIT_ERROR

    try:
        if config.command in ("oracle", "plan"):
            return COMMANDS[config.command](config, manager)
        return COMMANDS[config.command](config)
    except DegenerateGeometryError as e:
        logger.error(f"{config.command}: {e}")
        print(f"Error: {e} (no super-quantum machine exists at s = 0 or 1)", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, SearchError) as e:
        logger.error(f"{config.command}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
