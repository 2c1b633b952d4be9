"""Persistent cache of null tables keyed by their parameters."""

import logging
from typing import Optional, Tuple

from src.models.domain import Grid, NullTable, TestKind
from src.models.errors import InputError
from src.services.nulldist import enumerate_null, simulate_null
from src.storage.base import StorageBackend
from src.utils.csv_io import dump_null_table, load_null_table

logger = logging.getLogger(__name__)


def _seed_part(seed: Optional[int]) -> str:
    return "none" if seed is None else str(seed)


class NullTableCache:
    """
    Null tables stored as text in a storage backend.

    Tables are deterministic functions of their key, so a cached table is
    reused as is.
    """

    def __init__(self, storage: StorageBackend):
        self.storage = storage

    @staticmethod
    def key_for(
        kind: TestKind | str,
        n: int,
        d1: int,
        d2: int,
        grid_seeds: Tuple[Optional[int], Optional[int]],
        B: Optional[int],
        seed: Optional[int],
    ) -> str:
        """
        Storage key of a table.

        Exhaustive tables (seed None) are keyed without B.
        """
        kind = TestKind(kind)
        grids = f"g{_seed_part(grid_seeds[0])}-{_seed_part(grid_seeds[1])}"
        draws = "exhaustive" if seed is None else f"B{B}_s{seed}"
        return f"{kind.value}/n{n}_d{d1}x{d2}_{grids}_{draws}.txt"

    def _key(self, table: NullTable) -> str:
        return self.key_for(
            table.kind, table.n, table.d1, table.d2, table.grid_seeds, table.B, table.seed
        )

    def load(self, key: str) -> Optional[NullTable]:
        """Load a table, or None when absent or unreadable."""
        if not self.storage.exists(key):
            return None
        try:
            return load_null_table(self.storage.download(key).decode("utf-8"))
        except (InputError, UnicodeDecodeError) as e:
            logger.warning(f"Ignoring unreadable cached table {key}: {e}")
            return None

    def _matches(
        self,
        table: NullTable,
        kind: TestKind,
        grid1: Grid,
        grid2: Grid,
        B: Optional[int],
        seed: Optional[int],
    ) -> bool:
        expected = {
            "kind": kind,
            "n": grid1.n,
            "d1": grid1.d,
            "d2": grid2.d,
            "grid_seeds": (grid1.seed, grid2.seed),
            "seed": seed,
        }
        if B is not None:
            expected["B"] = B
        stored = {name: getattr(table, name) for name in expected}
        stored["grid_seeds"] = tuple(stored["grid_seeds"])
        if stored != expected:
            logger.warning(
                f"Ignoring cached table with parameters {stored}, expected {expected}"
            )
            return False
        return True

    def save(self, table: NullTable) -> str:
        """Store a table under its key."""
        key = self._key(table)
        self.storage.upload(key, dump_null_table(table).encode("utf-8"))
        logger.info(f"Cached null table {key}")
        return key

    def get_or_simulate(
        self,
        kind: TestKind | str,
        grid1: Grid,
        grid2: Grid,
        B: int,
        seed: int,
        workers: int = 1,
        exhaustive: bool = False,
    ) -> NullTable:
        """
        Return the cached table for these parameters, computing it on a miss.

        Args:
            kind: Rank statistic
            grid1, grid2: Grids of the two blocks
            B: Number of pairings (ignored when exhaustive)
            seed: Master seed (ignored when exhaustive)
            workers: Worker processes for simulation
            exhaustive: Enumerate all n! pairings instead of sampling

        Returns:
            NullTable
        """
        kind = TestKind(kind)
        key = self.key_for(
            kind,
            grid1.n,
            grid1.d,
            grid2.d,
            (grid1.seed, grid2.seed),
            None if exhaustive else B,
            None if exhaustive else seed,
        )

        table = self.load(key)
        if table is not None and not self._matches(
            table, kind, grid1, grid2, None if exhaustive else B, None if exhaustive else seed
        ):
            table = None
        if table is not None:
            logger.info(f"Null table cache hit: {key}")
            return table

        logger.info(f"Null table cache miss: {key}")
        if exhaustive:
            table = enumerate_null(kind, grid1, grid2)
        else:
            table = simulate_null(kind, grid1, grid2, B, seed, workers=workers)
        self.save(table)
        return table
