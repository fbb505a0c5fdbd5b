"""Shared-memory parallel tableau simplex.

A team of P workers (the calling thread plus P-1 helper threads) is created
once per solve and runs the whole pivot loop SPMD-style. Each iteration is
split into phases:

    I    build the tableau (calling thread, before the team starts)
    II   entering column: column-partitioned scan + max-|negative| reduction
    III  ratio test: row-partitioned min-ratio reduction + count of rows that
         cannot bound the entering column (unboundedness test)
    IV   pivot row normalization, column-partitioned
    V    elimination of the other constraint rows, row-partitioned, no barrier
    VI   fused objective-row pass: update, most-negative selection and
         negative count in one loop, then the stopping test

Work inside a phase is handed out with guided scheduling: a precomputed list
of shrinking chunks that workers claim from a shared ticket counter. Each
worker keeps one local candidate per reduction; candidates are folded in
worker order with index tie-breaks, so the result does not depend on which
worker claimed which chunk. Every arithmetic update matches the serial code
elementwise, which is why pivot sequences agree exactly.

Synchronization per iteration::

    III scan -> barrier(reduction) -> single: publish pivot -> barrier
    IV       -> barrier(pivot row final)
    V (nowait) -> VI -> barrier(reduction, stop test)
    single: reset control state -> barrier

Phase V carries no exit barrier because phase VI only touches the objective
row (which V never writes) and reads the pivot row (finalized by IV).
"""
from __future__ import annotations

import itertools
import math
import os
import threading
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional

import numpy as np

from .lp_model import LpProblem, SolveOutcome, SolverConfig, Status, UnboundedProblem, validate
from .tableau import (
    DenseTableau,
    PivotRule,
    basis_columns_ok,
    build_initial_tableau,
    eliminate_block,
    extract_solution,
    new_scratch,
)

__all__ = [
    "ChunkDispenser",
    "EnterCandidate",
    "GuidedSchedule",
    "RatioCandidateLocal",
    "WorkerTeam",
    "fold_entering",
    "fold_ratio",
    "guided_chunks",
    "phase2_initial_entering",
    "phase3_ratio_and_unbounded",
    "phase4_normalize",
    "phase5_eliminate_constraints",
    "phase6_fused_objective",
    "solve_parallel",
]

_INF = math.inf
_NO_INDEX = 1 << 62


# -- guided scheduling --------------------------------------------------------


@lru_cache(maxsize=256)
def guided_chunks(total: int, workers: int, chunk_min: int) -> tuple[tuple[int, int], ...]:
    """Chunk boundaries for a guided schedule over ``range(total)``.

    Each chunk takes ``max(ceil(remaining / (2 * workers)), chunk_min)``
    iterations (clipped to what is left), so sizes never increase.
    """
    if workers < 1 or chunk_min < 1:
        raise ValueError("workers and chunk_min must be >= 1")
    chunks = []
    start = 0
    while start < total:
        remaining = total - start
        size = min(max(-(-remaining // (2 * workers)), chunk_min), remaining)
        chunks.append((start, start + size))
        start += size
    return tuple(chunks)


@dataclass(frozen=True)
class GuidedSchedule:
    total: int
    workers: int
    chunk_min: int = 64

    @property
    def chunks(self) -> tuple[tuple[int, int], ...]:
        return guided_chunks(self.total, self.workers, self.chunk_min)

    def dispenser(self, record: bool = False) -> "ChunkDispenser":
        return ChunkDispenser(self.chunks, record)


class ChunkDispenser:
    """Hands out chunks of a schedule to whichever worker asks first.

    ``itertools.count.__next__`` is atomic under the GIL, so claiming a chunk
    takes no lock. With ``record=True`` every claim is logged as
    ``(chunk_index, worker)`` for ownership checks.
    """

    __slots__ = ("chunks", "claims", "_ticket")

    def __init__(self, chunks: tuple[tuple[int, int], ...], record: bool = False):
        self.chunks = chunks
        self.claims: Optional[list[tuple[int, int]]] = [] if record else None
        self._ticket = itertools.count().__next__

    def take(self, worker: int) -> Iterator[tuple[int, int]]:
        chunks, claims, ticket = self.chunks, self.claims, self._ticket
        while True:
            i = ticket()
            if i >= len(chunks):
                return
            if claims is not None:
                claims.append((i, worker))
            yield chunks[i]

    def verify_partition(self) -> None:
        """Assert every chunk was claimed by exactly one worker."""
        if self.claims is None:
            return
        seen = sorted(i for i, _ in self.claims)
        assert seen == list(range(len(self.chunks))), "chunk claimed twice or never"


# -- worker team --------------------------------------------------------------


class WorkerTeam:
    """A fixed-size team of workers that execute parallel regions.

    Worker 0 is the calling thread; workers 1..size-1 are daemon threads that
    live until :meth:`close`. Use as a context manager.
    """

    def __init__(self, size: int, pin_threads: bool = False):
        if size < 1:
            raise ValueError("team size must be >= 1")
        self.size = size
        self.pin_threads = pin_threads
        self._sync = threading.Barrier(size)
        self._start = threading.Barrier(size)
        self._done = threading.Barrier(size)
        self._job: Optional[Callable[[int], None]] = None
        self._errors: list[Optional[BaseException]] = [None] * size
        self._closed = False
        self._threads = [
            threading.Thread(target=self._serve, args=(w,), name=f"simplex-worker-{w}", daemon=True)
            for w in range(1, size)
        ]
        for t in self._threads:
            t.start()
        self._caller_affinity = None
        if pin_threads and hasattr(os, "sched_getaffinity"):
            self._caller_affinity = os.sched_getaffinity(0)
            self._pin(0)

    def _pin(self, worker: int) -> None:
        try:
            cpus = sorted(os.sched_getaffinity(0))
            os.sched_setaffinity(0, {cpus[worker % len(cpus)]})
        except (AttributeError, OSError):
            pass

    def _serve(self, worker: int) -> None:
        if self.pin_threads:
            self._pin(worker)
        while True:
            self._start.wait()
            job = self._job
            if job is None:
                return
            self._execute(job, worker)
            self._done.wait()

    def _execute(self, job: Callable[[int], None], worker: int) -> None:
        try:
            job(worker)
        except BaseException as exc:  # noqa: BLE001 - re-raised by run()
            self._errors[worker] = exc
            self._sync.abort()

    def barrier(self) -> None:
        """Synchronize all workers of the current region."""
        self._sync.wait()

    def run(self, job: Callable[[int], None]) -> None:
        """Run ``job(worker_index)`` on every worker and wait for all of them."""
        if self._closed:
            raise RuntimeError("team is closed")
        self._errors = [None] * self.size
        self._job = job
        if self.size > 1:
            self._start.wait()
        self._execute(job, 0)
        if self.size > 1:
            self._done.wait()
        self._job = None
        errors = [e for e in self._errors if e is not None]
        if errors:
            self._sync.reset()
            primary = [e for e in errors if not isinstance(e, threading.BrokenBarrierError)]
            raise (primary or errors)[0]

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        self._job = None
        if self.size > 1:
            self._start.wait()
        for t in self._threads:
            t.join()
        if self._caller_affinity is not None:
            os.sched_setaffinity(0, self._caller_affinity)

    def __enter__(self) -> "WorkerTeam":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


# -- reductions ---------------------------------------------------------------


@dataclass
class EnterCandidate:
    """Per-worker entering-column candidate.

    ``value``/``index`` track the most negative reduced cost (Dantzig),
    ``first_negative`` the smallest negative index (Bland), ``negatives`` the
    number of reduced costs below ``-eps_cost``.
    """

    value: float = _INF
    index: int = _NO_INDEX
    first_negative: int = _NO_INDEX
    negatives: int = 0

    def merge(self, other: "EnterCandidate") -> None:
        if (other.value, other.index) < (self.value, self.index):
            self.value, self.index = other.value, other.index
        if other.first_negative < self.first_negative:
            self.first_negative = other.first_negative
        self.negatives += other.negatives

    def column(self, bland: bool) -> Optional[int]:
        if self.negatives == 0:
            return None
        return self.first_negative if bland else self.index


@dataclass
class RatioCandidateLocal:
    """Per-worker ratio-test candidate.

    ``key`` is ``(ratio, row)`` under Dantzig and ``(ratio, basic variable)``
    under Bland; ``nonpositive`` counts rows with pivot-column entry
    ``<= eps_pivot``.
    """

    key: tuple[float, int] = (_INF, _NO_INDEX)
    row: int = -1
    nonpositive: int = 0

    def merge(self, other: "RatioCandidateLocal") -> None:
        if other.key < self.key:
            self.key, self.row = other.key, other.row
        self.nonpositive += other.nonpositive

    @property
    def ratio(self) -> float:
        return self.key[0]


def fold_entering(slots: list[EnterCandidate]) -> EnterCandidate:
    """Combine per-worker candidates in worker order."""
    out = EnterCandidate()
    for cand in slots:
        out.merge(cand)
    return out


def fold_ratio(slots: list[RatioCandidateLocal]) -> RatioCandidateLocal:
    out = RatioCandidateLocal()
    for cand in slots:
        out.merge(cand)
    return out


# -- phase bodies -------------------------------------------------------------


class _Engine:
    """Per-solve shared state plus the per-worker body of each phase."""

    def __init__(self, tableau: DenseTableau, team: WorkerTeam, eps_cost: float,
                 eps_pivot: float, chunk_min: int, record_claims: bool = False):
        self.tab = tableau
        self.team = team
        self.eps_cost = eps_cost
        self.eps_pivot = eps_pivot
        self.record = record_claims
        p = team.size
        self.row_sched = GuidedSchedule(tableau.m, p, chunk_min)
        # scans cover the n+m reduced costs; updates also cover the rhs column
        self.scan_sched = GuidedSchedule(tableau.rhs_col, p, chunk_min)
        self.col_sched = GuidedSchedule(tableau.cols, p, chunk_min)
        self.enter_slots = [EnterCandidate() for _ in range(p)]
        self.ratio_slots = [RatioCandidateLocal() for _ in range(p)]
        self._scratch: list[Optional[np.ndarray]] = [None] * p

    def scratch(self, worker: int) -> np.ndarray:
        # allocated by the owning worker so first touch lands near its core
        buf = self._scratch[worker]
        if buf is None:
            buf = self._scratch[worker] = new_scratch(self.tab)
        return buf

    def rows(self) -> ChunkDispenser:
        return self.row_sched.dispenser(self.record)

    def scan_cols(self) -> ChunkDispenser:
        return self.scan_sched.dispenser(self.record)

    def cols(self) -> ChunkDispenser:
        return self.col_sched.dispenser(self.record)

    # Phase II
    def scan_entering(self, disp: ChunkDispenser, worker: int) -> EnterCandidate:
        obj = self.tab.objective_row
        local = EnterCandidate()
        for c0, c1 in disp.take(worker):
            self._scan_segment(obj[c0:c1], c0, local)
        return local

    def _scan_segment(self, seg: np.ndarray, offset: int, local: EnterCandidate) -> None:
        neg = seg < -self.eps_cost
        count = int(np.count_nonzero(neg))
        if not count:
            return
        j = int(np.argmin(seg))
        local.merge(EnterCandidate(float(seg[j]), offset + j, offset + int(np.argmax(neg)), count))

    # Phase III
    def scan_ratio(self, disp: ChunkDispenser, k: int, bland: bool, worker: int) -> RatioCandidateLocal:
        data = self.tab.data
        rhs_col = self.tab.rhs_col
        basis = self.tab.basis
        local = RatioCandidateLocal()
        for r0, r1 in disp.take(worker):
            col = data[r0:r1, k]
            pos = np.flatnonzero(col > self.eps_pivot)
            local.nonpositive += (r1 - r0) - pos.size
            if not pos.size:
                continue
            ratios = data[r0:r1, rhs_col][pos] / col[pos]
            best = ratios.min()
            tied = pos[ratios == best]
            if bland:
                rows = r0 + tied
                row = int(rows[np.argmin(basis[rows])])
                key = (float(best), int(basis[row]))
            else:
                row = r0 + int(tied[0])
                key = (float(best), row)
            local.merge(RatioCandidateLocal(key, row, 0))
        return local

    # Phase IV
    def normalize(self, disp: ChunkDispenser, l: int, k: int, pivot: float, worker: int) -> None:
        prow = self.tab.data[l]
        for c0, c1 in disp.take(worker):
            prow[c0:c1] /= pivot
            if c0 <= k < c1:
                prow[k] = 1.0

    # Phase V
    def eliminate(self, disp: ChunkDispenser, l: int, k: int, worker: int) -> None:
        data = self.tab.data
        prow = data[l]
        scratch = self.scratch(worker)
        for r0, r1 in disp.take(worker):
            if r0 <= l < r1:
                spans = ((r0, l), (l + 1, r1))
            else:
                spans = ((r0, r1),)
            for s0, s1 in spans:
                if s0 < s1:
                    eliminate_block(data, s0, s1, k, prow, scratch)

    # Phase VI
    def fused_objective(self, disp: ChunkDispenser, l: int, k: int, ck: float,
                        worker: int) -> EnterCandidate:
        data = self.tab.data
        prow = data[l]
        obj = data[self.tab.m]
        scan_end = self.tab.rhs_col
        local = EnterCandidate()
        for c0, c1 in disp.take(worker):
            obj[c0:c1] -= ck * prow[c0:c1]
            if c0 <= k < c1:
                obj[k] = 0.0
            s1 = min(c1, scan_end)
            if c0 < s1:
                self._scan_segment(obj[c0:s1], c0, local)
        return local


# -- standalone phases ----------------------------------------------------------


def _engine(tableau: DenseTableau, team: WorkerTeam, eps_cost: float = 1e-9,
            eps_pivot: float = 1e-9, chunk_min: int = 64) -> _Engine:
    return _Engine(tableau, team, eps_cost, eps_pivot, chunk_min)


def phase2_initial_entering(tableau: DenseTableau, team: WorkerTeam, eps_cost: float = 1e-9,
                            chunk_min: int = 64, bland: bool = False) -> Optional[int]:
    """Entering column of ``tableau`` computed by the team (None if optimal)."""
    eng = _engine(tableau, team, eps_cost=eps_cost, chunk_min=chunk_min)
    disp = eng.scan_cols()

    def job(w: int) -> None:
        eng.enter_slots[w] = eng.scan_entering(disp, w)
        team.barrier()

    team.run(job)
    return fold_entering(eng.enter_slots).column(bland)


def phase3_ratio_and_unbounded(tableau: DenseTableau, k: int, team: WorkerTeam,
                               eps_pivot: float = 1e-9, chunk_min: int = 64,
                               bland: bool = False) -> tuple[int, int]:
    """Leaving row and the count of rows with ``a_ik <= eps_pivot``.

    Raises UnboundedProblem when that count equals ``m``.
    """
    eng = _engine(tableau, team, eps_pivot=eps_pivot, chunk_min=chunk_min)
    disp = eng.rows()

    def job(w: int) -> None:
        eng.ratio_slots[w] = eng.scan_ratio(disp, k, bland, w)
        team.barrier()

    team.run(job)
    cand = fold_ratio(eng.ratio_slots)
    if cand.nonpositive == tableau.m:
        raise UnboundedProblem(k, nonpositive_count=cand.nonpositive)
    return cand.row, cand.nonpositive


def phase4_normalize(tableau: DenseTableau, l: int, k: int, team: WorkerTeam,
                     chunk_min: int = 64) -> None:
    eng = _engine(tableau, team, chunk_min=chunk_min)
    disp = eng.cols()
    pivot = tableau.data[l, k]

    def job(w: int) -> None:
        eng.normalize(disp, l, k, pivot, w)
        team.barrier()

    team.run(job)


def phase5_eliminate_constraints(tableau: DenseTableau, l: int, k: int, team: WorkerTeam,
                                 chunk_min: int = 64) -> None:
    """Eliminate column ``k`` from the constraint rows (objective row untouched).

    Sets ``basis[l] = k``.
    """
    eng = _engine(tableau, team, chunk_min=chunk_min)
    disp = eng.rows()
    team.run(lambda w: eng.eliminate(disp, l, k, w))
    tableau.basis[l] = k


def phase6_fused_objective(tableau: DenseTableau, l: int, k: int, team: WorkerTeam,
                           eps_cost: float = 1e-9, chunk_min: int = 64,
                           bland: bool = False) -> tuple[Optional[int], int]:
    """Update the objective row against pivot row ``l`` and pick the next column.

    Returns ``(next_column or None, negative_count)``.
    """
    eng = _engine(tableau, team, eps_cost=eps_cost, chunk_min=chunk_min)
    disp = eng.cols()
    ck = tableau.data[tableau.m, k]

    def job(w: int) -> None:
        eng.enter_slots[w] = eng.fused_objective(disp, l, k, ck, w)
        team.barrier()

    team.run(job)
    cand = fold_entering(eng.enter_slots)
    return cand.column(bland), cand.negatives


# -- full solve -----------------------------------------------------------------


class _Control:
    """Loop state written only inside single sections (worker 0)."""

    def __init__(self, eng: _Engine, log: bool):
        self.status: Optional[Status] = None
        self.iterations = 0
        self.pivot_log: Optional[list[tuple[int, int]]] = [] if log else None
        self.ratio_disp = eng.rows()
        self.norm_disp: Optional[ChunkDispenser] = None
        self.elim_disp: Optional[ChunkDispenser] = None
        self.obj_disp: Optional[ChunkDispenser] = None


def _solve_loop(eng: _Engine, ctl: _Control, config: SolverConfig, cap: int, worker: int) -> None:
    team = eng.team
    tab = eng.tab
    data = tab.data
    m = tab.m
    rule = PivotRule(config.anti_cycling, config.eps_pivot)
    single = worker == 0
    debug = config.debug_checks

    # Phase II
    disp = eng.scan_cols()
    eng.enter_slots[worker] = eng.scan_entering(disp, worker)
    team.barrier()
    enter = fold_entering(eng.enter_slots)
    if debug and single:
        disp.verify_partition()

    while True:
        k = enter.column(rule.bland)
        if k is None:
            status = Status.OPTIMAL
            break
        if ctl.iterations >= cap:
            status = Status.ITERATION_LIMIT
            break

        # Phase III
        eng.ratio_slots[worker] = eng.scan_ratio(ctl.ratio_disp, k, rule.bland, worker)
        team.barrier()
        leave = fold_ratio(eng.ratio_slots)
        if leave.nonpositive == m:
            status = Status.UNBOUNDED
            break
        l = leave.row
        # read before any worker writes this iteration
        pivot = data[l, k]
        ck = data[m, k]
        if single:
            if debug:
                ctl.ratio_disp.verify_partition()
            tab.basis[l] = k
            if ctl.pivot_log is not None:
                ctl.pivot_log.append((k, l))
            ctl.norm_disp = eng.cols()
            ctl.elim_disp = eng.rows()
            ctl.obj_disp = eng.cols()
        team.barrier()

        # Phase IV
        eng.normalize(ctl.norm_disp, l, k, pivot, worker)
        team.barrier()

        # Phase V, then straight into VI
        eng.eliminate(ctl.elim_disp, l, k, worker)
        eng.enter_slots[worker] = eng.fused_objective(ctl.obj_disp, l, k, ck, worker)
        team.barrier()
        enter = fold_entering(eng.enter_slots)
        rule.record(leave.ratio)

        if single:
            if debug:
                for d in (ctl.norm_disp, ctl.elim_disp, ctl.obj_disp):
                    d.verify_partition()
                assert basis_columns_ok(tab, config.eps_pivot), "basis column drifted"
                assert (tab.rhs >= -config.eps_pivot).all(), "rhs went negative"
            ctl.iterations += 1
            ctl.ratio_disp = eng.rows()
        team.barrier()

    if single:
        ctl.status = status


def solve_parallel(problem: LpProblem, config: Optional[SolverConfig] = None,
                   team: Optional[WorkerTeam] = None) -> SolveOutcome:
    """Solve ``problem`` with ``config.threads`` workers.

    Produces the same status, pivot sequence and objective as
    :func:`~parsimplex.tableau.solve_serial`. An existing ``team`` may be
    passed in; its size then takes precedence over ``config.threads``.
    """
    config = config or SolverConfig()
    validate(problem)
    tab = build_initial_tableau(problem)
    cap = config.iteration_cap(problem.m, problem.n)

    own_team = team is None
    if own_team:
        team = WorkerTeam(config.threads, pin_threads=config.pin_threads)
    try:
        eng = _Engine(tab, team, config.eps_cost, config.eps_pivot, config.chunk_min,
                      record_claims=config.debug_checks)
        ctl = _Control(eng, config.log_pivots)
        t0 = time.perf_counter()
        team.run(lambda w: _solve_loop(eng, ctl, config, cap, w))
        elapsed = time.perf_counter() - t0
    finally:
        if own_team:
            team.close()

    outcome = SolveOutcome(ctl.status, iterations=ctl.iterations, pivot_log=ctl.pivot_log,
                           solve_seconds=elapsed)
    if ctl.status is Status.OPTIMAL:
        outcome.objective, outcome.x = extract_solution(tab)
    return outcome
