"""Worker tasks for Monte Carlo power studies."""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Tuple

import numpy as np

from src.models.domain import Grid, KonijnConfig, NullTable, PowerTable, TestKind
from src.services.grid import make_grid
from src.services.konijn import local_delta, mix, sample_independent
from src.services.rank_test import run_rank_test
from src.services.stats import wilks
from src.services.transport import center_outward
from src.utils.rng import replicate_rng

logger = logging.getLogger(__name__)

# Replicates handed to a worker at a time
REPLICATES_PER_TASK = 25


@dataclass
class PowerStudy:
    """
    One power study: a Konijn family at one sample size over a tau grid.

    Attributes:
        case: Case name (for reporting)
        config: Konijn family; its delta is replaced by tau / sqrt(n)
        n: Sample size
        taus: Local parameters
        tests: Tests to run
        replications: Number of simulated datasets
        alpha: Nominal level
        data_seed: Master seed of the data substreams
        grid_seed: Seed of both grids
        method: "asymptotic" or "permutation"
        null_tables: Null tables per rank test (permutation method)
    """
    case: str
    config: KonijnConfig
    n: int
    taus: List[float]
    tests: List[TestKind]
    replications: int
    alpha: float
    data_seed: int
    grid_seed: int
    method: str = "asymptotic"
    null_tables: Dict[TestKind, NullTable] = field(default_factory=dict)

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError(f"Replications must be >= 1, got {self.replications}")
        if not self.taus:
            raise ValueError("At least one tau is required")
        if not self.tests:
            raise ValueError("At least one test is required")
        if self.method == "permutation":
            missing = [t.value for t in self.tests if t.is_rank_test and t not in self.null_tables]
            if missing:
                raise ValueError(f"Missing null tables for {missing}")

    def grids(self) -> Tuple[Grid, Grid]:
        return (
            make_grid(self.n, self.config.d1, self.grid_seed),
            make_grid(self.n, self.config.d2, self.grid_seed),
        )


def power_replicate_task(args) -> np.ndarray:
    """
    Rejection counts (tests x taus) over a block of replicates.

    Each replicate draws one unmixed sample from its own substream and
    reuses it for every tau.
    """
    study, grid1, grid2, indices = args
    counts = np.zeros((len(study.tests), len(study.taus)), dtype=np.int64)
    rank_tests = [t for t in study.tests if t.is_rank_test]
    d1 = study.config.d1

    for index in indices:
        x_star = sample_independent(study.config, study.n, replicate_rng(study.data_seed, index))
        for j, tau in enumerate(study.taus):
            x = mix(x_star, study.config.with_delta(local_delta(tau, study.n)))
            x1, x2 = x[:, :d1], x[:, d1:]

            results = {}
            if rank_tests:
                rs1 = center_outward(x1, grid1)
                rs2 = center_outward(x2, grid2)
                for test in rank_tests:
                    results[test] = run_rank_test(
                        test, rs1, rs2, study.method, study.null_tables.get(test)
                    )
            if TestKind.WILKS in study.tests:
                results[TestKind.WILKS] = wilks(x1, x2)

            for i, test in enumerate(study.tests):
                counts[i, j] += results[test].rejects(study.alpha)

        logger.debug(f"Replicate {index} done")
    return counts


def _index_blocks(replications: int) -> List[range]:
    blocks = math.ceil(replications / REPLICATES_PER_TASK)
    return [
        range(b * REPLICATES_PER_TASK, min((b + 1) * REPLICATES_PER_TASK, replications))
        for b in range(blocks)
    ]


def run_power_study(study: PowerStudy, workers: int = 1) -> PowerTable:
    """
    Run a power study, optionally across a process pool.

    Results depend only on the study (seeds included), not on workers.

    Args:
        study: Study definition
        workers: Worker processes

    Returns:
        PowerTable of rejection frequencies
    """
    logger.info(
        f"Power study case={study.case} n={study.n} d1={study.config.d1} "
        f"d2={study.config.d2} reps={study.replications} taus={study.taus}"
    )
    grid1, grid2 = study.grids()
    tasks = [(study, grid1, grid2, block) for block in _index_blocks(study.replications)]

    if workers > 1:
        with Pool(processes=workers) as pool:
            parts = pool.map(power_replicate_task, tasks)
    else:
        parts = [power_replicate_task(task) for task in tasks]

    counts = np.sum(parts, axis=0)
    logger.info(f"Power study case={study.case} n={study.n} complete")
    return PowerTable(
        n=study.n,
        case=study.case,
        tests=tuple(t.value for t in study.tests),
        taus=tuple(float(tau) for tau in study.taus),
        frequencies=counts / study.replications,
        replications=study.replications,
        alpha=study.alpha,
    )
