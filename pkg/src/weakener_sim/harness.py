"""Monte-Carlo experiment driver and summary statistics.

Trial ``t`` of an experiment uses seed ``spec.seed + t`` for both the coin
stream and (salted) the fair scheduler, so a spec always reproduces the
same summary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from .adversary import make_scheduler
from .histories import BoundExceeded, History, check_prefix_property, is_linearizable
from .kernel import RunResult, SimConfig, Simulation, run
from .registers import BackendKind

CSV_COLUMNS = (
    "backend", "scheduler", "n", "trials", "seed", "all_returned_frac",
    "mean_rounds", "max_rounds", "lin_check_pass", "prefix_check_pass",
)


class NoTraces(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    n: int = 3
    backend: BackendKind = BackendKind.STRONG
    scheduler: str = "fair"
    program: str = "weakener"
    trials: int = 100
    seed: int = 0
    steps_cap: int = 100_000
    rounds_cap: Optional[int] = None
    record_history: bool = False
    check_bound: int = 10
    out: str = "json"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        object.__setattr__(self, "backend", BackendKind.parse(self.backend))

    def config(self, trial: int) -> SimConfig:
        return SimConfig(
            n=self.n, backend_kind=self.backend, seed=self.seed + trial,
            steps_cap=max(1, self.steps_cap), rounds_cap=self.rounds_cap, program=self.program,
        )


@dataclass(frozen=True)
class TrialRecord:
    """What a summary needs from one run; derivable from its trace alone."""

    seed: int
    all_returned: bool
    rounds: int  # max over processes of rounds completed
    min_rounds: int  # min over processes of rounds completed
    max_entered: int  # highest first-stage round entered by any process
    truncated: bool  # stopped by a cap before every process returned
    entered_main: int  # processes that reached a later program stage
    lin_ok: Optional[bool] = None
    prefix_ok: Optional[bool] = None
    lin_skipped: int = 0


def check_run(trace: History, bound: int = 10) -> tuple[bool, bool, int]:
    """(every register linearizable, every register prefix-monotone, registers over the bound)."""
    lin_ok = prefix_ok = True
    skipped = 0
    for register in trace.registers():
        try:
            lin_ok &= is_linearizable(trace, register, bound) is not None
        except BoundExceeded:
            skipped += 1
        prefix_ok &= check_prefix_property(trace.snapshots(register))
    return lin_ok, prefix_ok, skipped


def record_from_result(seed: int, result: RunResult, bound: int = 10, check: bool = False) -> TrialRecord:
    lin = prefix = None
    skipped = 0
    if check and result.trace is not None:
        lin, prefix, skipped = check_run(result.trace, bound)
    return TrialRecord(
        seed=seed,
        all_returned=result.all_returned,
        rounds=max(result.rounds_completed),
        min_rounds=min(result.rounds_completed),
        max_entered=max(result.rounds),
        truncated=result.stop_reason != "returned",
        entered_main=sum(1 for s in result.stages if s > 0),
        lin_ok=lin,
        prefix_ok=prefix,
        lin_skipped=skipped,
    )


def record_from_trace(seed: int, trace: History, n: int, program: str = "weakener",
                      bound: int = 10, check: bool = False) -> TrialRecord:
    """Rebuild a :class:`TrialRecord` from exported events only.

    A writer enters round j+1 by passing its phase-2 guard in round j; a
    checker by completing its write of ``R2[j]``.  Composed programs hand off
    silently, so entering the task shows up as the first task-register event.
    """
    entered = [0] * n
    returned = [False] * n
    in_main = [False] * n
    for e in trace.events:
        if e.register is not None and e.register.startswith("T"):
            in_main[e.pid] = True
            continue
        if e.kind == "return":
            returned[e.pid] = True
        if e.round is not None and not in_main[e.pid]:
            entered[e.pid] = max(entered[e.pid], e.round)
        if e.kind == "guard" and e.value == "continue" and e.pid < 2:
            entered[e.pid] = max(entered[e.pid], e.round + 1)
        if e.kind == "respond" and e.register == "R2" and e.pid >= 2:
            entered[e.pid] = max(entered[e.pid], e.round + 1)
    if program == "trivial":
        completed = [int(r) for r in returned]
        in_main = [False] * n
    elif program == "weakener":
        completed = [entered[p] + returned[p] for p in range(n)]
    else:
        completed = [entered[p] + (1 + returned[p] if in_main[p] else 0) for p in range(n)]
    lin = prefix = None
    skipped = 0
    if check:
        lin, prefix, skipped = check_run(trace, bound)
    return TrialRecord(
        seed=seed,
        all_returned=all(returned),
        rounds=max(completed),
        min_rounds=min(completed),
        max_entered=max(entered),
        truncated=not all(returned),
        entered_main=sum(in_main),
        lin_ok=lin,
        prefix_ok=prefix,
        lin_skipped=skipped,
    )


def writer_gate_violations(trace: History) -> list[int]:
    """Rounds j where p0 or p1 entered round j+1 although nobody invoked a write of ``R2[j]``."""
    r2_written: set[int] = set()
    writer_entered: set[int] = set()
    for e in trace.events:
        if e.kind == "invoke" and e.register == "R2" and e.value is True:
            r2_written.add(e.round)
        if e.pid in (0, 1) and e.round is not None and (e.register is None or e.register in ("R1", "C1", "R2")):
            writer_entered.add(e.round)
            if e.kind == "guard" and e.value == "continue":
                writer_entered.add(e.round + 1)
    return sorted(j - 1 for j in writer_entered if j >= 1 and j - 1 not in r2_written)


def run_trial(spec: ExperimentSpec, trial: int) -> tuple[TrialRecord, RunResult]:
    config = spec.config(trial)
    sim = Simulation(config, record=spec.record_history)
    sched = make_scheduler(spec.scheduler, spec.n, config.seed)
    result = run(sim, sched, steps_cap=spec.steps_cap)
    return record_from_result(config.seed, result, spec.check_bound, spec.record_history), result


def _trial_record(args: tuple[ExperimentSpec, int]) -> TrialRecord:
    return run_trial(*args)[0]


@dataclass
class Summary:
    backend: str
    scheduler: str
    n: int
    trials: int
    seed: int
    all_returned_frac: float
    mean_rounds: float
    max_rounds: int
    min_rounds: int
    std_rounds: float
    rounds_histogram: dict[int, int]
    continuation: dict[int, float]
    entered_main: int
    lin_check_pass: Optional[int] = None
    prefix_check_pass: Optional[int] = None
    lin_check_skipped: int = 0
    program: str = "weakener"

    def tail(self, k: int) -> float:
        """Fraction of trials needing more than ``k`` rounds."""
        return sum(c for r, c in self.rounds_histogram.items() if r > k) / self.trials

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)

    def csv_row(self) -> list:
        d = asdict(self)
        return [d[c] for c in CSV_COLUMNS]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        if header:
            writer.writerow(CSV_COLUMNS)
        writer.writerow(self.csv_row())
        return buf.getvalue()


def per_round_continuation(records: Sequence[TrialRecord]) -> dict[int, float]:
    """For each round j: fraction of trials reaching j in which some process entered j+1.

    Rounds whose outcome a cap cut off are not counted; rounds no trial
    reached are omitted.
    """
    if not records:
        raise NoTraces("no trial records")
    reached: Counter[int] = Counter()
    continued: Counter[int] = Counter()
    for rec in records:
        for j in range(rec.max_entered + 1):
            if rec.truncated and j == rec.max_entered:
                continue
            reached[j] += 1
            if j < rec.max_entered:
                continued[j] += 1
    return {j: continued[j] / reached[j] for j in sorted(reached)}


def summarize(spec: ExperimentSpec, records: Sequence[TrialRecord]) -> Summary:
    rounds = [r.rounds for r in records]
    trials = len(records)
    mean = sum(rounds) / trials
    var = sum((r - mean) ** 2 for r in rounds) / (trials - 1) if trials > 1 else 0.0
    checked = [r for r in records if r.lin_ok is not None]
    return Summary(
        backend=spec.backend.value,
        scheduler=spec.scheduler,
        n=spec.n,
        trials=trials,
        seed=spec.seed,
        all_returned_frac=sum(r.all_returned for r in records) / trials,
        mean_rounds=mean,
        max_rounds=max(rounds),
        min_rounds=min(r.min_rounds for r in records),
        std_rounds=math.sqrt(var),
        rounds_histogram=dict(sorted(Counter(rounds).items())),
        continuation=per_round_continuation(records),
        entered_main=sum(r.entered_main for r in records),
        lin_check_pass=sum(bool(r.lin_ok) for r in checked) if checked else None,
        prefix_check_pass=sum(bool(r.prefix_ok) for r in checked) if checked else None,
        lin_check_skipped=sum(r.lin_skipped for r in records),
        program=spec.program,
    )


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> Summary:
    jobs = [(spec, t) for t in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_trial_record, jobs, chunksize=64))
    else:
        records = [_trial_record(job) for job in jobs]
    return summarize(spec, records)


def iter_trials(spec: ExperimentSpec) -> Iterable[tuple[TrialRecord, RunResult]]:
    for t in range(spec.trials):
        yield run_trial(spec, t)


def summarize_traces(spec: ExperimentSpec, traces: Sequence[History]) -> Summary:
    records = [
        record_from_trace(spec.seed + t, h, spec.n, spec.program, spec.check_bound, spec.record_history)
        for t, h in enumerate(traces)
    ]
    return summarize(spec, records)
