"""Benchmark harness: thread/size grids, median timing, speedup and efficiency,
and the last-level-cache capacity model."""
from __future__ import annotations

import csv
import enum
import logging
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

from .generator import GenSpec, generate
from .lp_model import LpProblem, SolveOutcome, SolverConfig
from .parallel import WorkerTeam, solve_parallel
from .tableau import solve_serial

__all__ = [
    "BenchCell",
    "BenchReport",
    "CSV_COLUMNS",
    "CacheModel",
    "GridConfig",
    "GridConfigError",
    "PUBLISHED_CACHE_LIMITS",
    "SerialConvention",
    "cache_limit_brute_force",
    "cache_limit_constraints",
    "cache_limit_note",
    "emit_report",
    "over_cache_limit",
    "run_grid",
    "tableau_bytes",
]

log = logging.getLogger(__name__)

MIB = 1 << 20

CSV_COLUMNS = ("m", "n", "P", "median_s", "speedup", "efficiency", "over_cache_limit")

# Published maximum-constraint values for the default 64 MiB / 8-byte model.
# The 8192 entry disagrees with the closed form (which gives 920).
PUBLISHED_CACHE_LIMITS = {256: 2771, 512: 2651, 1024: 2429, 2048: 2048, 4096: 1499, 8192: 1499}


class GridConfigError(ValueError):
    pass


class SerialConvention(enum.Enum):
    MEASURED = "measured"
    TWICE_T2 = "twice-t2"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CacheModel:
    """Total last-level cache available to the tableau.

    The default is four 16 MiB L3 caches holding 8-byte doubles.
    """

    cache_bytes: int = 64 * MIB
    element_bytes: int = 8

    def __post_init__(self):
        if self.cache_bytes <= 0 or self.element_bytes <= 0:
            raise ValueError("cache_bytes and element_bytes must be positive")

    @property
    def capacity(self) -> int:
        """Number of elements that fit."""
        return self.cache_bytes // self.element_bytes


def cache_limit_constraints(b: int, model: CacheModel = CacheModel()) -> int:
    """Largest integer ``n`` with ``n**2 + b*n <= C / element_bytes``.

    ``b`` is the number of variables and ``n`` the number of constraints in a
    footprint model of ``(n + b) * n`` elements. Uses exact integer arithmetic
    (``math.isqrt``), which matches the floor of the quadratic root.
    """
    if b < 0:
        raise ValueError("b must be non-negative")
    cap = model.capacity
    # n = floor((-b + sqrt(b^2 + 4 cap)) / 2); isqrt gives the floor of the root,
    # then nudge by at most one to land on the exact integer boundary
    n = (math.isqrt(b * b + 4 * cap) - b) // 2
    while (n + 1) * (n + 1 + b) <= cap:
        n += 1
    while n > 0 and n * (n + b) > cap:
        n -= 1
    return n


def cache_limit_brute_force(b: int, model: CacheModel = CacheModel()) -> int:
    """Independent integer search for :func:`cache_limit_constraints`."""
    cap = model.capacity
    n = 0
    while (n + 1) * (n + 1 + b) <= cap:
        n += 1
    return n


def cache_limit_note(b: int, model: CacheModel = CacheModel()) -> Optional[str]:
    """Explain a disagreement with the published value for ``b``, if any."""
    if model != CacheModel() or b not in PUBLISHED_CACHE_LIMITS:
        return None
    computed = cache_limit_constraints(b, model)
    published = PUBLISHED_CACHE_LIMITS[b]
    if computed == published:
        return None
    return (f"note: b={b} gives {computed} from n^2 + b*n <= {model.capacity}; "
            f"the published table lists {published}, which does not satisfy that bound")


def tableau_bytes(m: int, n: int, element_bytes: int = 8) -> int:
    """Exact storage of the (m+1) x (n+m+1) tableau."""
    return (m + 1) * (n + m + 1) * element_bytes


def over_cache_limit(m: int, n: int, model: CacheModel = CacheModel()) -> bool:
    """Whether ``m`` constraints exceed the bound for ``n`` variables."""
    return m > cache_limit_constraints(n, model)


@dataclass
class GridConfig:
    sizes: Sequence[tuple[int, int]]
    thread_counts: Sequence[int]
    runs: int = 10
    density: float = 0.9
    seed: int = 1
    serial_convention: SerialConvention = SerialConvention.TWICE_T2
    instances: int = 1
    warmup: int = 1
    chunk_min: int = 64
    max_iterations: Optional[int] = None
    cache: CacheModel = field(default_factory=CacheModel)

    def validate(self) -> None:
        if self.runs < 1:
            raise GridConfigError("runs must be >= 1")
        if self.instances < 1:
            raise GridConfigError("instances must be >= 1")
        if self.warmup < 0:
            raise GridConfigError("warmup must be >= 0")
        if not self.thread_counts:
            raise GridConfigError("thread_counts is empty")
        if list(self.thread_counts) != sorted(self.thread_counts):
            raise GridConfigError("thread_counts must be sorted ascending")
        if any(p < 1 for p in self.thread_counts):
            raise GridConfigError("thread counts must be >= 1")
        if self.serial_convention is SerialConvention.TWICE_T2 and 2 not in self.thread_counts:
            raise GridConfigError("the twice-t2 convention needs P=2 in thread_counts")


@dataclass
class BenchCell:
    m: int
    n: int
    threads: int
    median_seconds: float
    speedup: float
    efficiency: float
    over_cache_limit: bool
    status: str = "Optimal"
    iterations: int = 0

    def csv_row(self) -> list:
        return [self.m, self.n, self.threads, repr(self.median_seconds), repr(self.speedup),
                repr(self.efficiency), int(self.over_cache_limit)]


@dataclass
class BenchReport:
    cells: list[BenchCell] = field(default_factory=list)
    serial_convention: SerialConvention = SerialConvention.TWICE_T2
    # (m, n) -> serial seconds used as the speedup numerator
    serial_seconds: dict[tuple[int, int], float] = field(default_factory=dict)

    def check_identities(self) -> None:
        """Assert E = S/P everywhere and S(2) = 2 under twice-t2."""
        for cell in self.cells:
            assert cell.efficiency == cell.speedup / cell.threads, cell
            if self.serial_convention is SerialConvention.TWICE_T2 and cell.threads == 2:
                assert cell.speedup == 2.0 or math.isnan(cell.speedup), cell


def _speedup(serial: float, parallel: float) -> float:
    if parallel > 0:
        return serial / parallel
    return math.nan


def _time_runs(problems: list[LpProblem], runs: int, warmup: int,
               solve: Callable[[LpProblem], SolveOutcome]) -> tuple[float, SolveOutcome]:
    times = []
    last = None
    for prob in problems:
        for _ in range(warmup):
            solve(prob)
        for _ in range(runs):
            last = solve(prob)
            times.append(last.solve_seconds)
    return statistics.median(times), last


def run_grid(config: GridConfig, problems: Optional[dict[tuple[int, int], list[LpProblem]]] = None
             ) -> BenchReport:
    """Time every (size, P) cell and derive speedup and efficiency.

    Only the pivot loop is timed. ``problems`` may supply preloaded instances
    per size; otherwise ``config.instances`` instances are generated per size
    with consecutive seeds.
    """
    config.validate()
    report = BenchReport(serial_convention=config.serial_convention)

    for m, n in config.sizes:
        if problems is not None and (m, n) in problems:
            insts = problems[(m, n)]
        else:
            insts = [generate(GenSpec(m, n, config.density, config.seed + i))
                     for i in range(config.instances)]

        medians: dict[int, float] = {}
        outcomes: dict[int, tuple[str, int]] = {}
        for p in config.thread_counts:
            solver_cfg = SolverConfig(threads=p, chunk_min=config.chunk_min,
                                      max_iterations=config.max_iterations)
            try:
                with WorkerTeam(p) as team:
                    med, last = _time_runs(insts, config.runs, config.warmup,
                                           lambda q: solve_parallel(q, solver_cfg, team))
                medians[p] = med
                outcomes[p] = (str(last.status), last.iterations)
            except Exception as exc:  # a failing cell must not abort the grid
                log.warning("cell %dx%d P=%d failed: %s", m, n, p, exc)
                medians[p] = math.nan
                outcomes[p] = (f"error: {exc}", 0)
            log.info("%dx%d P=%d median %.6fs", m, n, p, medians[p])

        if config.serial_convention is SerialConvention.TWICE_T2:
            serial = 2 * medians[2]
        else:
            serial_cfg = SolverConfig(max_iterations=config.max_iterations)
            serial, _ = _time_runs(insts, config.runs, config.warmup,
                                   lambda q: solve_serial(q, serial_cfg))
        report.serial_seconds[(m, n)] = serial

        flag = over_cache_limit(m, n, config.cache)
        for p in config.thread_counts:
            s = _speedup(serial, medians[p])
            status, iters = outcomes[p]
            report.cells.append(BenchCell(m, n, p, medians[p], s, s / p, flag, status, iters))
    return report


def emit_report(report: BenchReport, out_dir: Union[str, Path], metric: str = "speedup"
                ) -> list[Path]:
    """Write ``report.csv`` plus one plot-data file per fixed constraint count.

    Each ``<metric>_m<M>.csv`` has a ``threads`` column and one column per
    problem size with that ``m``. Returns the paths written.
    """
    if metric not in ("speedup", "efficiency"):
        raise ValueError(f"unknown metric {metric!r}")
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for cell in report.cells:
                w.writerow(cell.csv_row())
        written.append(path)

        by_m: dict[int, list[BenchCell]] = {}
        for cell in report.cells:
            by_m.setdefault(cell.m, []).append(cell)
        for m, cells in sorted(by_m.items()):
            sizes = sorted({(c.m, c.n) for c in cells})
            threads = sorted({c.threads for c in cells})
            value = {(c.m, c.n, c.threads): getattr(c, metric) for c in cells}
            path = out / f"{metric}_m{m}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["threads"] + [f"{a}x{b}" for a, b in sizes])
                for p in threads:
                    row = [value.get((a, b, p)) for a, b in sizes]
                    w.writerow([p] + ["" if v is None else repr(v) for v in row])
            written.append(path)
    except OSError as exc:
        raise OSError(f"failed writing report to {exc.filename or out}: {exc.strerror}") from exc
    return written
