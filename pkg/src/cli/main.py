"""
Command-line entry point.

Subcommands: test, power, critval, are, omega-table, generate, grid.
Reports go to stdout (or --out); logs go to stderr.
Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, TextIO

import yaml

from src.cli.schemas import (
    CriticalValuesResponse,
    EfficiencyResponse,
    RunConfig,
    TestReport,
    TestResultResponse,
)
from src.config.logging_config import configure_logging
from src.config.settings import Settings
from src.config.simulation import SimulationSettings
from src.config.storage import StorageSettings
from src.models.domain import PowerTable, RadialFamily, TestKind
from src.models.errors import InputError, NumericalError
from src.services.efficiency import are_elliptical, omega_table, power_curve
from src.services.grid import make_grid
from src.services.konijn import config_for_case, generate, load_cases, local_delta
from src.services.null_cache import NullTableCache
from src.services.nulldist import critical_values
from src.services.rank_test import permutation_label, run_rank_test
from src.services.stats import wilks
from src.services.transport import center_outward
from src.storage.factory import create_storage_backend
from src.tasks import PowerStudy, run_power_study
from src.utils.csv_io import (
    format_float,
    read_sample_csv,
    write_grid_csv,
    write_ranks_signs_csv,
    write_sample_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

QUANTILE_LEVELS = (0.90, 0.95, 0.99)


def _split(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _float_list(text: str) -> List[float]:
    try:
        return [float(item) for item in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(item) for item in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _kind_list(text: str) -> List[TestKind]:
    try:
        return [TestKind(item) for item in _split(text)]
    except ValueError:
        choices = ", ".join(kind.value for kind in TestKind)
        raise argparse.ArgumentTypeError(f"expected a list from {{{choices}}}, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="Output file (default stdout)")
    common.add_argument("--threads", type=int, help="Worker processes")
    common.add_argument("--log-level", help="Logging level (default from LOG_LEVEL)")

    dims = argparse.ArgumentParser(add_help=False)
    dims.add_argument("--d1", type=int, help="Dimension of block 1")
    dims.add_argument("--d2", type=int, help="Dimension of block 2")

    seeds = argparse.ArgumentParser(add_help=False)
    seeds.add_argument("--grid-seed", type=int, help="Grid seed")
    seeds.add_argument("--data-seed", type=int, help="Data seed")
    seeds.add_argument("--null-seed", type=int, help="Null table seed")

    nulls = argparse.ArgumentParser(add_help=False)
    nulls.add_argument("--method", choices=["asymptotic", "permutation"], help="P-value method")
    nulls.add_argument("--B", type=int, help="Number of null pairings")
    nulls.add_argument("--exhaustive", action="store_true", help="Enumerate all n! pairings (n <= 8)")

    parser = argparse.ArgumentParser(
        prog="corank",
        description="Center-outward rank tests of independence between two random vectors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", parents=[common, dims, seeds, nulls], help="Test independence on CSV data")
    p.add_argument("--input", type=Path, required=True, help="CSV with header row")
    p.add_argument("--block1", type=_split, help="Column names of block 1")
    p.add_argument("--block2", type=_split, help="Column names of block 2")
    p.add_argument("--tests", type=_kind_list, help="Tests to run (default all)")
    p.add_argument("--alpha", type=float, help="Nominal level")
    p.add_argument("--ranks-out", type=Path, help="Directory for per-block ranks/signs CSV")

    p = sub.add_parser("power", parents=[common, dims, seeds, nulls], help="Monte Carlo power study")
    p.add_argument("--case", help="Simulation case (a, b, c, d)")
    p.add_argument("--n", type=_int_list, help="Sample sizes")
    p.add_argument("--taus", type=_float_list, help="Local parameters")
    p.add_argument("--reps", type=int, help="Replications")
    p.add_argument("--tests", type=_kind_list, help="Tests to run (default all)")
    p.add_argument("--alpha", type=float, help="Nominal level")

    p = sub.add_parser("critval", parents=[common, dims, seeds, nulls], help="Null table quantiles")
    p.add_argument("--n", type=_int_list, required=True, help="Sample size")
    p.add_argument("--kinds", type=_kind_list, help="Rank statistics (default vdw)")

    p = sub.add_parser("are", parents=[common, dims], help="Asymptotic relative efficiency")
    p.add_argument("--score", choices=["sign", "wilcoxon", "vdw"], help="Score function")
    p.add_argument("--radial", choices=["gaussian", "t"], help="Radial family of block 1")
    p.add_argument("--nu", type=float, help="t degrees of freedom of block 1")
    p.add_argument("--radial2", choices=["gaussian", "t"], help="Radial family of block 2")
    p.add_argument("--nu2", type=float, help="t degrees of freedom of block 2")
    p.add_argument("--matrices", type=Path, help="YAML with Sigma1, Sigma2, M1, M2")
    p.add_argument("--taus", type=_float_list, help="Also print local power at these taus")
    p.add_argument("--alpha", type=float, help="Level for local power")

    p = sub.add_parser("omega-table", parents=[common], help="Omega(d1, d2) lower bounds")
    p.add_argument("--max-d", type=int, help="Largest dimension (default 10)")

    p = sub.add_parser("generate", parents=[common, dims, seeds], help="Sample a Konijn family")
    p.add_argument("--case", help="Simulation case (a, b, c, d)")
    p.add_argument("--n", type=_int_list, required=True, help="Sample size")
    p.add_argument("--tau", type=float, help="Local parameter (delta = tau / sqrt(n))")

    p = sub.add_parser("grid", parents=[common, seeds], help="Export a grid")
    p.add_argument("--n", type=_int_list, required=True, help="Grid size")
    p.add_argument("--d", type=int, required=True, help="Dimension")

    return parser


_ARG_FIELDS = (
    "input", "d1", "d2", "block1", "block2", "tests", "alpha", "method", "B",
    "grid_seed", "data_seed", "null_seed", "reps", "taus", "case", "n", "out",
    "threads", "ranks_out", "kinds", "score", "radial", "nu", "radial2", "nu2",
    "matrices", "max_d", "tau", "d",
)


def config_from_args(
    args: argparse.Namespace,
    settings: Settings,
    simulation: SimulationSettings,
) -> RunConfig:
    """Merge parsed flags over settings defaults into a RunConfig."""
    values = {
        "alpha": settings.DEFAULT_ALPHA,
        "method": settings.DEFAULT_METHOD,
        "B": settings.DEFAULT_PERMUTATIONS,
        "grid_seed": settings.DEFAULT_GRID_SEED,
        "data_seed": settings.DEFAULT_DATA_SEED,
        "null_seed": settings.DEFAULT_NULL_SEED,
        "threads": settings.WORKERS,
        "reps": simulation.SIM_REPLICATIONS,
    }
    if args.command == "power":
        values["taus"] = simulation.SIM_TAUS

    for name in _ARG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    values["exhaustive"] = getattr(args, "exhaustive", False)
    return RunConfig(command=args.command, **values)


@contextlib.contextmanager
def _output(path: Optional[Path]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as f:
            yield f


def _require(value, flag: str):
    if value is None:
        raise InputError(f"{flag} is required")
    return value


def _single_n(config: RunConfig) -> int:
    if len(config.n) != 1:
        raise InputError(f"Exactly one --n is required, got {config.n}")
    return config.n[0]


def _cache(storage_settings: StorageSettings) -> NullTableCache:
    return NullTableCache(create_storage_backend(storage_settings))


def cmd_test(config: RunConfig, storage_settings: StorageSettings, out: TextIO) -> TestReport:
    """Run the requested tests on a CSV sample and write a JSON report."""
    sample = read_sample_csv(
        _require(config.input, "--input"), config.d1, config.d2, config.block1, config.block2
    )
    n, d1, d2 = sample.n, sample.x1.shape[1], sample.x2.shape[1]
    if n < 4:
        raise InputError(f"Need at least 4 observations, got {n}")
    logger.info(f"Testing independence: n={n} d1={d1} d2={d2} tests={[t.value for t in config.tests]}")

    results = []
    rank_tests = [t for t in config.tests if t.is_rank_test]
    if rank_tests:
        grid1 = make_grid(n, d1, config.grid_seed)
        grid2 = make_grid(n, d2, config.grid_seed)
        rs1 = center_outward(sample.x1, grid1)
        rs2 = center_outward(sample.x2, grid2)

        if config.ranks_out is not None:
            config.ranks_out.mkdir(parents=True, exist_ok=True)
            for name, rs in (("block1", rs1), ("block2", rs2)):
                with open(config.ranks_out / f"ranks_signs_{name}.csv", "w", newline="") as f:
                    write_ranks_signs_csv(f, rs)

        cache = _cache(storage_settings) if config.method == "permutation" else None
        for kind in rank_tests:
            table = None
            if cache is not None:
                table = cache.get_or_simulate(
                    kind, grid1, grid2, config.B, config.null_seed,
                    workers=config.threads, exhaustive=config.exhaustive,
                )
            results.append(run_rank_test(kind, rs1, rs2, config.method, table))

    if TestKind.WILKS in config.tests:
        results.append(wilks(sample.x1, sample.x2))

    report = TestReport(
        n=n, d1=d1, d2=d2, results=[TestResultResponse.from_result(r) for r in results]
    )
    out.write(report.model_dump_json(indent=2) + "\n")
    return report


def cmd_power(
    config: RunConfig,
    storage_settings: StorageSettings,
    simulation: SimulationSettings,
    out: TextIO,
) -> List[PowerTable]:
    """Run a power study and write rejection frequencies as CSV."""
    cases = load_cases(simulation.SIM_CASES_FILE)
    if config.case not in cases:
        raise InputError(f"Unknown case {config.case!r}; available: {sorted(cases)}")
    d1, d2 = _require(config.d1, "--d1"), _require(config.d2, "--d2")
    sizes = config.n or [432]
    family = config_for_case(cases[config.case], d1, d2)
    cache = _cache(storage_settings) if config.method == "permutation" else None

    tables = []
    for n in sizes:
        null_tables = {}
        if cache is not None:
            grid1, grid2 = make_grid(n, d1, config.grid_seed), make_grid(n, d2, config.grid_seed)
            for kind in (t for t in config.tests if t.is_rank_test):
                null_tables[kind] = cache.get_or_simulate(
                    kind, grid1, grid2, config.B, config.null_seed,
                    workers=config.threads, exhaustive=config.exhaustive,
                )
        study = PowerStudy(
            case=config.case,
            config=family,
            n=n,
            taus=config.taus,
            tests=config.tests,
            replications=config.reps,
            alpha=config.alpha,
            data_seed=config.data_seed,
            grid_seed=config.grid_seed,
            method=config.method,
            null_tables=null_tables,
        )
        tables.append(run_power_study(study, workers=config.threads))

    out.write(",".join(["n", "case", "test"] + [f"tau={tau:g}" for tau in config.taus]) + "\n")
    for table in tables:
        for i, test in enumerate(table.tests):
            cells = [f"{freq:.6g}" for freq in table.frequencies[i]]
            out.write(",".join([str(table.n), table.case, test] + cells) + "\n")
    return tables


def cmd_critval(config: RunConfig, storage_settings: StorageSettings, out: TextIO) -> List[CriticalValuesResponse]:
    """Compute (or reuse cached) null tables and print their upper quantiles."""
    n = _single_n(config)
    d1, d2 = _require(config.d1, "--d1"), _require(config.d2, "--d2")
    grid1 = make_grid(n, d1, config.grid_seed)
    grid2 = make_grid(n, d2, config.grid_seed)
    cache = _cache(storage_settings)

    responses = []
    for kind in config.kinds:
        table = cache.get_or_simulate(
            kind, grid1, grid2, config.B, config.null_seed,
            workers=config.threads, exhaustive=config.exhaustive,
        )
        quantiles = critical_values(table, QUANTILE_LEVELS)
        responses.append(
            CriticalValuesResponse(
                kind=kind.value,
                n=n,
                d1=d1,
                d2=d2,
                B=table.B,
                seed=table.seed,
                method=permutation_label(table),
                quantiles={f"{level:.2f}": q for level, q in quantiles.items()},
                cache_key=cache.key_for(
                    kind, n, d1, d2, table.grid_seeds, table.B, table.seed
                ),
            )
        )

    out.write("[" + ",\n".join(r.model_dump_json(indent=2) for r in responses) + "]\n")
    return responses


def _load_matrices(path: Optional[Path]) -> Dict[str, object]:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except FileNotFoundError:
        raise InputError(f"Matrices file not found: {path}")
    except yaml.YAMLError as e:
        raise InputError(f"Malformed matrices file {path}: {e}")
    unknown = set(raw) - {"Sigma1", "Sigma2", "M1", "M2"}
    if unknown:
        raise InputError(f"Unknown keys in {path}: {sorted(unknown)}")
    return raw


def cmd_are(config: RunConfig, out: TextIO) -> EfficiencyResponse:
    """Print the ARE report (and optional local power curve) as JSON."""
    d1, d2 = _require(config.d1, "--d1"), _require(config.d2, "--d2")
    radial1 = RadialFamily(kind=config.radial, nu=config.nu)
    if config.radial2 is None:
        radial2 = radial1
    else:
        radial2 = RadialFamily(kind=config.radial2, nu=config.nu2)

    report = are_elliptical(
        config.score, config.score, radial1, radial2, d1, d2, **_load_matrices(config.matrices)
    )
    curves = None
    if "taus" in config.model_fields_set:
        curves = power_curve(report, config.taus, config.alpha)

    response = EfficiencyResponse.from_report(report, curves)
    out.write(response.model_dump_json(indent=2) + "\n")
    return response


def cmd_omega_table(config: RunConfig, out: TextIO) -> None:
    """Print Omega(d1, d2) for d1, d2 up to --max-d as CSV."""
    out.write("d1,d2,omega\n")
    for d1, d2, value in omega_table(config.max_d):
        out.write(f"{d1},{d2},{format_float(value)}\n")


def cmd_generate(config: RunConfig, simulation: SimulationSettings, out: TextIO) -> None:
    """Write a Konijn sample in the CSV format `test` reads."""
    n = _single_n(config)
    d1, d2 = _require(config.d1, "--d1"), _require(config.d2, "--d2")
    cases = load_cases(simulation.SIM_CASES_FILE)
    if config.case not in cases:
        raise InputError(f"Unknown case {config.case!r}; available: {sorted(cases)}")

    family = config_for_case(cases[config.case], d1, d2, local_delta(config.tau, n))
    x1, x2 = generate(family, n, config.data_seed)
    write_sample_csv(out, x1, x2)


def cmd_grid(config: RunConfig, out: TextIO) -> None:
    """Write a grid as 17-significant-digit CSV."""
    grid = make_grid(_single_n(config), _require(config.d, "--d"), config.grid_seed)
    write_grid_csv(out, grid)


def run(config: RunConfig) -> None:
    """Dispatch one validated configuration."""
    storage_settings = StorageSettings()
    simulation = SimulationSettings()
    simulation.validate_study()

    handlers: Dict[str, Callable[[TextIO], object]] = {
        "test": lambda out: cmd_test(config, storage_settings, out),
        "power": lambda out: cmd_power(config, storage_settings, simulation, out),
        "critval": lambda out: cmd_critval(config, storage_settings, out),
        "are": lambda out: cmd_are(config, out),
        "omega-table": lambda out: cmd_omega_table(config, out),
        "generate": lambda out: cmd_generate(config, simulation, out),
        "grid": lambda out: cmd_grid(config, out),
    }
    with _output(config.out) as out:
        handlers[config.command](out)


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        settings = Settings()
        configure_logging(settings, level=args.log_level)
        settings.validate_defaults()
        config = config_from_args(args, settings, SimulationSettings())
        run(config)
    except NumericalError as e:
        logger.debug("Numerical failure", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except (InputError, ValueError, OSError) as e:
        logger.debug("Input error", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
