"""Deterministic simulation kernel.

The kernel advances a :class:`Simulation` one scheduler decision at a time.
A decision either steps a process (one program line, or one internal step of
a strongly linearizable operation) or responds a pending register operation.
Schedulers see everything through :class:`Observation`, including past coin
flips, and nothing about future ones: coins come from a private
``random.Random`` seeded by ``SimConfig.seed`` and are drawn only when
process 0 executes its flip line.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Protocol

from .histories import Event, History
from .process import Invoke, ProcessState, Status
from .registers import (
    BackendKind,
    InsertionChoice,
    OperationRecord,
    RegisterBackend,
    RegisterId,
    make_backend,
)
from .weakener import ProgramFamily, program_family


class InvalidConfig(ValueError):
    pass


class DisabledDecision(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    n: int = 3
    backend_kind: BackendKind = BackendKind.ATOMIC
    seed: int = 0
    steps_cap: int = 100_000
    rounds_cap: Optional[int] = None
    program: str = "weakener"

    def validate(self) -> None:
        if self.n < 3:
            raise InvalidConfig(f"n must be at least 3, got {self.n}")
        if self.steps_cap < 1:
            raise InvalidConfig(f"steps_cap must be at least 1, got {self.steps_cap}")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig(f"seed {self.seed} is not a 64-bit unsigned integer")
        if self.rounds_cap is not None and self.rounds_cap < 0:
            raise InvalidConfig("rounds_cap must be non-negative")


@dataclass(frozen=True)
class StepProcess:
    pid: int


@dataclass(frozen=True)
class RespondOp:
    op_id: int
    insertion: Optional[InsertionChoice] = None


SchedulerDecision = StepProcess | RespondOp


@dataclass(frozen=True)
class StepOutcome:
    decision: SchedulerDecision
    clock: int
    events: tuple[Event, ...]
    coin: Optional[int] = None


@dataclass(frozen=True)
class Observation:
    """Read-only view handed to schedulers."""

    clock: int
    n: int
    backend_kind: BackendKind
    processes: tuple[ProcessState, ...]
    pending: tuple[OperationRecord, ...]
    coins: tuple[tuple[int, int], ...]  # (round, outcome), in flip order
    steppable: tuple[int, ...]
    respondable: tuple[int, ...]
    rounds_cap: Optional[int] = None
    _backend: RegisterBackend = field(compare=False, repr=False, default=None)

    def pending_of(self, pid: int) -> Optional[OperationRecord]:
        for op in self.pending:
            if op.pid == pid:
                return op
        return None

    def op(self, op_id: int) -> OperationRecord:
        return self._backend.ops[op_id]

    def log(self, register: RegisterId) -> tuple[int, ...]:
        return self._backend.log(register)

    def legal_insertions(self, op_id: int) -> list[tuple[InsertionChoice, Any]]:
        return self._backend.legal_insertions(op_id)


class Scheduler(Protocol):
    def next_decision(self, obs: Observation) -> SchedulerDecision: ...


class Simulation:
    def __init__(self, config: SimConfig, record: bool = True, programs: Optional[ProgramFamily] = None) -> None:
        config.validate()
        self.config = config
        self.programs = programs if programs is not None else program_family(config.program, config.n)
        if self.programs.n != config.n:
            raise InvalidConfig(f"program family is for n={self.programs.n}, config has n={config.n}")
        self.processes: list[ProcessState] = [self.programs[i].initial(i) for i in range(config.n)]
        self.backend = make_backend(config.backend_kind, record_snapshots=record)
        self.backend.emit = self._emit_op
        self.history: Optional[History] = History() if record else None
        self.clock = 0
        self.rng = random.Random(config.seed)
        self.coins: list[tuple[int, int]] = []
        self.rounds_cap = config.rounds_cap
        self._events: list[Event] = []

    # -- events -----------------------------------------------------------

    def _emit(self, kind: str, pid: int, register: Optional[RegisterId] = None, round: Optional[int] = None,
              value: Any = None, index: Optional[int] = None) -> None:
        if register is not None:
            event = Event(self.clock, pid, kind, register.name, register.round, value, index)
        else:
            event = Event(self.clock, pid, kind, None, round, value, index)
        self._events.append(event)
        if self.history is not None:
            self.history.append(event)

    def _emit_op(self, kind: str, op: OperationRecord, value: Any, index: Optional[int]) -> None:
        self._emit(kind, op.pid, op.register, None, value, index)

    # -- queries ----------------------------------------------------------

    def parked(self, pid: int) -> bool:
        st = self.processes[pid]
        return self.rounds_cap is not None and not st.returned and st.round >= self.rounds_cap and st.pending_op is None

    def can_step(self, pid: int) -> bool:
        """True when stepping ``pid`` makes progress (NOP steps excluded)."""
        st = self.processes[pid]
        if st.returned or self.parked(pid):
            return False
        return st.pending_op is None or self.backend.needs_internal_step(st.pending_op)

    def can_respond(self, op_id: int) -> bool:
        op = self.backend.ops.get(op_id)
        return op is not None and op.pending and self.backend.respondable(op_id)

    def enabled(self, d: SchedulerDecision) -> bool:
        if isinstance(d, StepProcess):
            if not 0 <= d.pid < self.config.n:
                return False
            return self.processes[d.pid].returned or self.can_step(d.pid)
        return self.can_respond(d.op_id)

    def _steppable(self) -> tuple[int, ...]:
        cap = self.rounds_cap
        backend = self.backend
        out = []
        for st in self.processes:
            if st.status is Status.RETURNED:
                continue
            if st.pending_op is None:
                if cap is None or st.round < cap:
                    out.append(st.pid)
            elif backend.needs_internal_step(st.pending_op):
                out.append(st.pid)
        return tuple(out)

    def all_returned(self) -> bool:
        return all(st.returned for st in self.processes)

    def observe(self) -> Observation:
        pending = tuple(self.backend.pending_ops())
        return Observation(
            clock=self.clock,
            n=self.config.n,
            backend_kind=self.backend.kind,
            processes=tuple(self.processes),
            pending=pending,
            coins=tuple(self.coins),
            steppable=self._steppable(),
            respondable=tuple(op.op_id for op in pending if self.backend.respondable(op.op_id)),
            rounds_cap=self.rounds_cap,
            _backend=self.backend,
        )

    # -- transitions ------------------------------------------------------

    def apply(self, d: SchedulerDecision, coin: Optional[int] = None) -> StepOutcome:
        """Apply one decision.  ``coin`` forces the outcome of a flip made by this step."""
        if not self.enabled(d):
            raise DisabledDecision(f"{d} is not enabled at clock {self.clock}")
        self._events = []
        flipped: list[int] = []
        if isinstance(d, StepProcess):
            self._step(d.pid, coin, flipped)
        else:
            op = self.backend.ops[d.op_id]
            value = self.backend.respond(d.op_id, d.insertion, now=self.clock)
            st = replace(self.processes[op.pid], pending_op=None)
            self.processes[op.pid] = self.programs[op.pid].resume(st, value)
        outcome = StepOutcome(d, self.clock, tuple(self._events), flipped[0] if flipped else None)
        self.clock += 1
        return outcome

    def _step(self, pid: int, forced: Optional[int], flipped: list[int]) -> None:
        st = self.processes[pid]
        if st.returned:
            self._emit("nop", pid, round=st.round)
            return
        if st.pending_op is not None:
            self.backend.advance_internal(st.pending_op, now=self.clock)
            return

        def flip() -> int:
            outcome = forced if forced is not None else self.rng.getrandbits(1)
            flipped.append(outcome)
            self.coins.append((st.round, outcome))
            self._emit("coin", pid, round=st.round, value=outcome)
            return outcome

        program = self.programs[pid]
        new, effect = program.step(st, flip)
        if isinstance(effect, Invoke):
            op_id = self.backend.invoke(pid, effect.register, effect.kind, effect.argument, now=self.clock)
            op = self.backend.ops[op_id]
            if op.pending:
                new = replace(new, pending_op=op_id)
            else:
                new = program.resume(new, op.returned)
        else:
            self._emit(effect.kind, pid, round=new.round if effect.kind != "guard" else st.round, value=effect.value)
        self.processes[pid] = new

    # -- search support ---------------------------------------------------

    def clone(self) -> "Simulation":
        """Copy without history; coin draws in the copy must be forced."""
        other = object.__new__(Simulation)
        other.config = self.config
        other.programs = self.programs
        other.processes = list(self.processes)
        other.backend = self.backend.clone()
        other.backend.emit = other._emit_op
        other.history = None
        other.clock = self.clock
        other.rng = None
        other.coins = list(self.coins)
        other.rounds_cap = self.rounds_cap
        other._events = []
        return other

    def state_key(self) -> tuple:
        """Canonical state, independent of op ids and clock values."""
        ops = self.backend.ops

        def ref(op_id: Optional[int]) -> Any:
            return None if op_id is None else (ops[op_id].pid, ops[op_id].seqno)

        procs = tuple(replace(st, pending_op=ref(st.pending_op)) for st in self.processes)
        logs = tuple(
            (reg, tuple((ops[i].pid, ops[i].seqno, ops[i].returned, ops[i].responded_at is None) for i in log))
            for reg, log in sorted(self.backend.logs.items())
        )
        pending = []
        for op in sorted(self.backend.pending_ops(), key=lambda o: o.pid):
            before = frozenset(
                ref(i) for log in self.backend.logs.values() for i in log
                if ops[i].responded_at is not None and ops[i].responded_at < op.invoked_at
            )
            pending.append((ref(op.op_id), op.register, op.kind, op.argument, op.committed, before))
        return procs, logs, tuple(pending)


def new_simulation(config: SimConfig, record: bool = True) -> Simulation:
    return Simulation(config, record=record)


def observe(sim: Simulation) -> Observation:
    return sim.observe()


def apply(sim: Simulation, d: SchedulerDecision) -> StepOutcome:
    return sim.apply(d)


@dataclass
class RunResult:
    statuses: tuple[str, ...]
    rounds: tuple[int, ...]  # highest round entered in the first program stage
    rounds_completed: tuple[int, ...]  # over all stages
    stages: tuple[int, ...]
    steps: int
    stop_reason: str
    coins: tuple[tuple[int, int], ...]
    trace: Optional[History] = None
    snapshots: dict[RegisterId, list[tuple[int, ...]]] = field(default_factory=dict)

    @property
    def all_returned(self) -> bool:
        return all(s == Status.RETURNED.value for s in self.statuses)


def _stage0_round(st: ProcessState) -> int:
    return st.stage_rounds[0] - 1 if st.stage_rounds else st.round


def _completed(st: ProcessState) -> int:
    return sum(st.stage_rounds) + st.round + (1 if st.returned else 0)


def run(sim: Simulation, sched: Scheduler, steps_cap: Optional[int] = None,
        rounds_cap: Optional[int] | str = "config") -> RunResult:
    """Drive ``sim`` with ``sched`` until all return, a cap is hit, or nothing can move.

    Processes that enter round ``rounds_cap`` are halted there (status
    ``cap-exhausted``) while the others catch up.
    """
    steps_cap = sim.config.steps_cap if steps_cap is None else steps_cap
    if rounds_cap != "config":
        sim.rounds_cap = rounds_cap
    steps = 0
    while True:
        if sim.all_returned():
            reason = "returned"
            break
        if steps >= steps_cap:
            reason = "steps-cap"
            break
        obs = sim.observe()
        if not obs.steppable and not obs.respondable:
            reason = "rounds-cap" if any(sim.parked(p) for p in range(sim.config.n)) else "stuck"
            break
        sim.apply(sched.next_decision(obs))
        steps += 1
    statuses = tuple(
        st.status.value if st.returned else ("cap-exhausted" if sim.parked(st.pid) else Status.RUNNING.value)
        for st in sim.processes
    )
    return RunResult(
        statuses=statuses,
        rounds=tuple(_stage0_round(st) for st in sim.processes),
        rounds_completed=tuple(_completed(st) for st in sim.processes),
        stages=tuple(st.stage for st in sim.processes),
        steps=steps,
        stop_reason=reason,
        coins=tuple(sim.coins),
        trace=sim.history,
        snapshots={r: list(s) for r, s in sim.backend.snapshots.items()},
    )
