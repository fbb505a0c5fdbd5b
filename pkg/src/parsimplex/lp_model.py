"""Problem and solution data model shared by the solvers, generator and CLI.

Problems are canonical-form maximizations::

    maximize    c @ x
    subject to  A @ x <= b,  x >= 0,  b >= 0

which is what lets the slack variables act as the starting basis.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, TextIO, Union

import numpy as np

__all__ = [
    "AntiCycling",
    "DimensionMismatch",
    "IterationLimitReached",
    "LpProblem",
    "NegativeRhs",
    "NonFiniteEntry",
    "ProblemFormatError",
    "SolveOutcome",
    "SolverConfig",
    "Status",
    "UnboundedProblem",
    "ValidationError",
    "dump_problem",
    "load_problem",
    "read_problem",
    "validate",
    "write_problem",
]


class ValidationError(ValueError):
    """Base class for rejected problems."""


class NegativeRhs(ValidationError):
    def __init__(self, row: int, value: float):
        super().__init__(f"b[{row}] = {value!r} is negative")
        self.row = row
        self.value = value


class NonFiniteEntry(ValidationError):
    """A non-finite value was found.

    ``where`` is ``"a"``, ``"b"`` or ``"c"``; ``col`` is ``None`` for vectors.
    """

    def __init__(self, where: str, row: int, col: Optional[int] = None):
        loc = f"{where}[{row}]" if col is None else f"{where}[{row}, {col}]"
        super().__init__(f"{loc} is not finite")
        self.where = where
        self.row = row
        self.col = col


class DimensionMismatch(ValidationError):
    pass


class UnboundedProblem(Exception):
    """Raised by the ratio test when no row bounds the entering column."""

    def __init__(self, column: int, nonpositive_count: Optional[int] = None):
        super().__init__(f"column {column} has no positive pivot candidate")
        self.column = column
        self.nonpositive_count = nonpositive_count


class IterationLimitReached(Exception):
    pass


class ProblemFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class AntiCycling:
    """Anti-cycling policy.

    With ``stall_window=None`` the Dantzig rule is used throughout. Otherwise
    the solver falls back to Bland's rule once ``stall_window`` consecutive
    degenerate pivots have happened, and returns to Dantzig after the first
    non-degenerate one.
    """

    stall_window: Optional[int] = None

    @classmethod
    def off(cls) -> "AntiCycling":
        return cls(None)

    @classmethod
    def bland_after_stall(cls, stall_window: int = 50) -> "AntiCycling":
        if stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        return cls(stall_window)

    @property
    def enabled(self) -> bool:
        return self.stall_window is not None


@dataclass(frozen=True)
class SolverConfig:
    threads: int = 1
    chunk_min: int = 64
    eps_cost: float = 1e-9
    eps_pivot: float = 1e-9
    # None means 50 * (m + n), resolved per problem
    max_iterations: Optional[int] = None
    anti_cycling: AntiCycling = field(default_factory=AntiCycling.off)
    log_pivots: bool = False
    # best-effort CPU pinning of worker threads (Linux only)
    pin_threads: bool = False
    # per-iteration invariant assertions and chunk ownership checks
    debug_checks: bool = False

    def __post_init__(self):
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.chunk_min < 1:
            raise ValueError("chunk_min must be >= 1")
        if not self.eps_cost > 0 or not self.eps_pivot > 0:
            raise ValueError("eps_cost and eps_pivot must be positive")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")

    def iteration_cap(self, m: int, n: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 50 * (m + n)


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A dense canonical-form maximization instance.

    ``density`` and ``seed`` are metadata carried through the file format;
    they do not affect solving.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    density: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("a", "b", "c"):
            arr = np.array(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.a.shape[0] if self.a.ndim == 2 else 0

    @property
    def n(self) -> int:
        return self.a.shape[1] if self.a.ndim == 2 else 0

    def same_as(self, other: "LpProblem") -> bool:
        """Bit-for-bit equality, metadata included."""
        return (
            self.density == other.density
            and self.seed == other.seed
            and all(
                x.shape == y.shape and x.tobytes() == y.tobytes()
                for x, y in ((self.a, other.a), (self.b, other.b), (self.c, other.c))
            )
        )


def validate(problem: LpProblem) -> None:
    """Raise the first violated invariant of ``problem``; return None if valid."""
    a, b, c = problem.a, problem.b, problem.c
    if a.ndim != 2:
        raise DimensionMismatch(f"A must be 2-dimensional, got shape {a.shape}")
    m, n = a.shape
    if m < 1 or n < 1:
        raise DimensionMismatch(f"A must be non-empty, got shape {a.shape}")
    if b.shape != (m,):
        raise DimensionMismatch(f"b has shape {b.shape}, expected ({m},)")
    if c.shape != (n,):
        raise DimensionMismatch(f"c has shape {c.shape}, expected ({n},)")
    if not np.isfinite(a).all():
        i, j = np.argwhere(~np.isfinite(a))[0]
        raise NonFiniteEntry("a", int(i), int(j))
    for name, vec in (("b", b), ("c", c)):
        bad = np.flatnonzero(~np.isfinite(vec))
        if bad.size:
            raise NonFiniteEntry(name, int(bad[0]))
    neg = np.flatnonzero(b < 0)
    if neg.size:
        raise NegativeRhs(int(neg[0]), float(b[neg[0]]))


@dataclass
class SolveOutcome:
    status: Status
    objective: float = math.nan
    x: Optional[np.ndarray] = None
    iterations: int = 0
    pivot_log: Optional[list[tuple[int, int]]] = None
    # wall-clock seconds of the pivot loop only (tableau build excluded)
    solve_seconds: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL

    def check(self, problem: LpProblem, tol: Optional[float] = None) -> bool:
        """Primal feasibility and objective consistency of an optimal outcome."""
        if not self.optimal or self.x is None:
            return False
        if tol is None:
            tol = 1e-6 * (1.0 + abs(self.objective))
        x = self.x
        return bool(
            (x >= -tol).all()
            and (problem.a @ x <= problem.b + tol).all()
            and abs(problem.c @ x - self.objective) <= tol
        )


# -- problem file format -----------------------------------------------------
#
#   m n density seed        (seed may be "-" when absent)
#   m lines of n values     (rows of A)
#   one line of m values    (b)
#   one line of n values    (c)
#
# '#' starts a comment; blank lines are ignored.

PathLike = Union[str, Path]


def _content_lines(lines: Iterable[str]):
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield lineno, text.split()


def _floats(tokens: list[str], count: int, lineno: int, what: str) -> list[float]:
    if len(tokens) != count:
        raise ProblemFormatError(f"{what}: expected {count} values, got {len(tokens)}", lineno)
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise ProblemFormatError(f"{what}: {exc}", lineno) from None


def read_problem(stream: TextIO) -> LpProblem:
    lines = _content_lines(stream)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ProblemFormatError("empty file: missing header 'm n density seed'") from None
    if len(header) != 4:
        raise ProblemFormatError("header must be 'm n density seed'", lineno)
    try:
        m, n = int(header[0]), int(header[1])
        density = float(header[2])
        seed = None if header[3] in ("-", "none", "None") else int(header[3])
    except ValueError as exc:
        raise ProblemFormatError(f"bad header: {exc}", lineno) from None
    if m < 1 or n < 1:
        raise ProblemFormatError("m and n must be positive", lineno)

    def take(count: int, what: str) -> list[float]:
        try:
            ln, tokens = next(lines)
        except StopIteration:
            raise ProblemFormatError(f"unexpected end of file while reading {what}") from None
        return _floats(tokens, count, ln, what)

    a = [take(n, f"row {i} of A") for i in range(m)]
    b = take(m, "b")
    c = take(n, "c")
    extra = next(lines, None)
    if extra is not None:
        raise ProblemFormatError("trailing data after c", extra[0])
    return LpProblem(np.array(a), np.array(b), np.array(c), density=density, seed=seed)


def write_problem(problem: LpProblem, stream: TextIO) -> None:
    # repr() round-trips doubles exactly
    seed = "-" if problem.seed is None else str(problem.seed)
    stream.write(f"{problem.m} {problem.n} {problem.density!r} {seed}\n")
    for row in problem.a:
        stream.write(" ".join(repr(float(v)) for v in row) + "\n")
    stream.write(" ".join(repr(float(v)) for v in problem.b) + "\n")
    stream.write(" ".join(repr(float(v)) for v in problem.c) + "\n")


def load_problem(path: PathLike) -> LpProblem:
    with open(path, encoding="utf-8") as fh:
        return read_problem(fh)


def dump_problem(problem: LpProblem, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_problem(problem, fh)
