"""Shared read/write registers under three consistency backends.

Every backend keeps, per register, a *linearization log*: the committed
sequential order of operations on that register.  The backends differ only
in when and where an operation enters its log:

* ``Atomic``: invoke, commit and respond happen in one scheduler decision.
* ``StrongLin``: the operation is appended at its first internal step and
  responds at a later decision.  Logs only ever grow at the end.
* ``MerelyLin``: nothing is committed until the response, at which point the
  scheduler picks any position that keeps the log a valid linearization.
  This late, retroactive choice is the extra power a strong adversary gets
  from registers that are linearizable but not strongly linearizable.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Callable, Optional


class Bottom(enum.Enum):
    """The undefined initial value of ``R1[j]``; unequal to every integer."""

    BOT = "bot"

    def __repr__(self) -> str:
        return "⊥"


BOT = Bottom.BOT


class BackendKind(str, enum.Enum):
    ATOMIC = "atomic"
    STRONG = "strong"
    LINEARIZABLE = "linearizable"

    @classmethod
    def parse(cls, name: str | "BackendKind") -> "BackendKind":
        if isinstance(name, BackendKind):
            return name
        aliases = {"stronglin": "strong", "merelylin": "linearizable", "lin": "linearizable"}
        key = name.lower()
        return cls(aliases.get(key, key))


class OpKind(str, enum.Enum):
    READ = "read"
    WRITE = "write"


class RegisterError(Exception):
    pass


class PendingOpExists(RegisterError):
    pass


class NotPending(RegisterError):
    pass


class WrongBackend(RegisterError):
    pass


class IllegalInsertion(RegisterError):
    pass


class AlreadyCommitted(RegisterError):
    pass


@dataclass(frozen=True, order=True)
class RegisterId:
    """A register instance.

    ``name`` is ``R1``, ``C1`` or ``R2`` for the round registers of the
    weakener; task registers added by composed programs use other names.
    """

    name: str
    round: int

    def __post_init__(self) -> None:
        if self.round < 0:
            raise ValueError(f"negative round in {self.name}[{self.round}]")

    def __str__(self) -> str:
        return f"{self.name}[{self.round}]"


_INITIAL = {"R1": BOT, "C1": -1, "R2": False}


def initial_value(register: RegisterId) -> Any:
    return _INITIAL.get(register.name, BOT)


def _check_argument(register: RegisterId, argument: Any) -> None:
    if register.name in ("R1", "C1"):
        ok = type(argument) is int and argument in (0, 1)
    elif register.name == "R2":
        ok = argument is True
    else:
        ok = argument is not None and argument is not BOT
    if not ok:
        raise ValueError(f"bad write argument {argument!r} for {register}")


@dataclass(frozen=True)
class OperationRecord:
    op_id: int
    pid: int
    seqno: int  # index of this op among the pid's own operations
    register: RegisterId
    kind: OpKind
    argument: Any = None
    invoked_at: int = 0
    responded_at: Optional[int] = None
    returned: Any = None
    commit_index: Optional[int] = None

    @property
    def committed(self) -> bool:
        return self.commit_index is not None

    @property
    def pending(self) -> bool:
        return self.responded_at is None


@dataclass(frozen=True)
class InsertionChoice:
    position: int


# emit(kind, op, value, insertion_index); installed by the simulation kernel
Emit = Callable[[str, OperationRecord, Any, Optional[int]], None]


def _noop_emit(kind: str, op: OperationRecord, value: Any, index: Optional[int]) -> None:
    pass


def read_value(ops: dict[int, OperationRecord], log: tuple[int, ...], position: int, register: RegisterId) -> Any:
    """Value a read placed at ``position`` of ``log`` would return."""
    for op_id in reversed(log[:position]):
        op = ops[op_id]
        if op.kind is OpKind.WRITE:
            return op.argument
    return initial_value(register)


class RegisterBackend:
    """Common state: operation table, per-register logs and snapshots."""

    kind: BackendKind

    def __init__(self, record_snapshots: bool = True) -> None:
        self.ops: dict[int, OperationRecord] = {}
        self.logs: dict[RegisterId, tuple[int, ...]] = {}
        self.snapshots: dict[RegisterId, list[tuple[int, ...]]] = {}
        self.pending_by_pid: dict[int, int] = {}
        self.op_counts: dict[int, int] = {}
        self.record_snapshots = record_snapshots
        self.emit: Emit = _noop_emit
        self._next_id = 0

    def clone(self) -> "RegisterBackend":
        other = object.__new__(type(self))
        other.ops = dict(self.ops)
        other.logs = dict(self.logs)
        other.snapshots = {r: list(s) for r, s in self.snapshots.items()}
        other.pending_by_pid = dict(self.pending_by_pid)
        other.op_counts = dict(self.op_counts)
        other.record_snapshots = self.record_snapshots
        other.emit = _noop_emit
        other._next_id = self._next_id
        return other

    def log(self, register: RegisterId) -> tuple[int, ...]:
        return self.logs.get(register, ())

    def value(self, register: RegisterId) -> Any:
        """Current sequential value: the last committed write, or the initial value."""
        log = self.log(register)
        return read_value(self.ops, log, len(log), register)

    def pending_ops(self) -> list[OperationRecord]:
        return [self.ops[i] for i in self.pending_by_pid.values()]

    def respondable(self, op_id: int) -> bool:
        raise NotImplementedError

    def needs_internal_step(self, op_id: int) -> bool:
        return False

    # -- core operations -------------------------------------------------

    def invoke(self, pid: int, register: RegisterId, kind: OpKind, argument: Any = None, now: int = 0) -> int:
        if pid in self.pending_by_pid:
            raise PendingOpExists(f"p{pid} already has pending op {self.pending_by_pid[pid]}")
        if kind is OpKind.WRITE:
            _check_argument(register, argument)
        else:
            argument = None
        op_id = self._next_id
        self._next_id += 1
        seqno = self.op_counts.get(pid, 0)
        self.op_counts[pid] = seqno + 1
        op = OperationRecord(op_id, pid, seqno, register, kind, argument, invoked_at=now)
        self.ops[op_id] = op
        self.pending_by_pid[pid] = op_id
        self.emit("invoke", op, argument, None)
        return op_id

    def _commit(self, op_id: int, position: int) -> OperationRecord:
        op = self.ops[op_id]
        log = self.log(op.register)
        returned = read_value(self.ops, log, position, op.register) if op.kind is OpKind.READ else None
        op = replace(op, commit_index=position, returned=returned)
        self.ops[op_id] = op
        new_log = log[:position] + (op_id,) + log[position:]
        self.logs[op.register] = new_log
        if self.record_snapshots:
            self.snapshots.setdefault(op.register, []).append(new_log)
        self.emit("commit", op, returned if op.kind is OpKind.READ else op.argument, position)
        return op

    def _finish(self, op_id: int, now: int) -> Any:
        op = replace(self.ops[op_id], responded_at=now)
        self.ops[op_id] = op
        del self.pending_by_pid[op.pid]
        self.emit("respond", op, op.returned, None)
        return op.returned

    def _pending(self, op_id: int) -> OperationRecord:
        op = self.ops.get(op_id)
        if op is None or not op.pending:
            raise NotPending(f"op {op_id} is not pending")
        return op

    def legal_insertions(self, op_id: int) -> list[tuple[InsertionChoice, Any]]:
        raise WrongBackend(f"{self.kind.value} backend has no insertion choice")

    def respond(self, op_id: int, choice: Optional[InsertionChoice] = None, now: int = 0) -> Any:
        raise NotImplementedError

    def advance_internal(self, op_id: int, now: int = 0) -> OperationRecord:
        raise WrongBackend(f"{self.kind.value} backend has no internal steps")


class AtomicBackend(RegisterBackend):
    kind = BackendKind.ATOMIC

    def invoke(self, pid, register, kind, argument=None, now=0):
        op_id = super().invoke(pid, register, kind, argument, now)
        self._commit(op_id, len(self.log(register)))
        self._finish(op_id, now)
        return op_id

    def respondable(self, op_id: int) -> bool:
        return False

    def respond(self, op_id, choice=None, now=0):
        self._pending(op_id)
        raise AssertionError("atomic operations never stay pending")


class StrongLinBackend(RegisterBackend):
    kind = BackendKind.STRONG

    def needs_internal_step(self, op_id: int) -> bool:
        return not self.ops[op_id].committed

    def respondable(self, op_id: int) -> bool:
        op = self.ops[op_id]
        return op.pending and op.committed

    def advance_internal(self, op_id: int, now: int = 0) -> OperationRecord:
        op = self._pending(op_id)
        if op.committed:
            raise AlreadyCommitted(f"op {op_id} already committed")
        return self._commit(op_id, len(self.log(op.register)))

    def respond(self, op_id, choice=None, now=0):
        op = self._pending(op_id)
        if not op.committed:
            raise NotPending(f"op {op_id} has not taken its commit step")
        if choice is not None and choice.position != op.commit_index:
            raise IllegalInsertion("strongly linearizable ops are placed at commit time")
        return self._finish(op_id, now)


class MerelyLinBackend(RegisterBackend):
    kind = BackendKind.LINEARIZABLE

    def respondable(self, op_id: int) -> bool:
        return self.ops[op_id].pending

    def lower_bound(self, op: OperationRecord) -> int:
        """First position not preceded in real time by a committed op that it must follow."""
        log = self.log(op.register)
        bound = 0
        for index, other_id in enumerate(log):
            other = self.ops[other_id]
            if other.responded_at is not None and other.responded_at < op.invoked_at:
                bound = index + 1
        return bound

    def legal_insertions(self, op_id: int) -> list[tuple[InsertionChoice, Any]]:
        op = self._pending(op_id)
        log = self.log(op.register)
        out = []
        for position in range(self.lower_bound(op), len(log) + 1):
            if op.kind is OpKind.READ:
                out.append((InsertionChoice(position), read_value(self.ops, log, position, op.register)))
            elif self._write_fits(op, log, position):
                out.append((InsertionChoice(position), None))
        return out

    def _write_fits(self, op: OperationRecord, log: tuple[int, ...], position: int) -> bool:
        # reads between the insertion point and the next write would now see op.argument
        for other_id in log[position:]:
            other = self.ops[other_id]
            if other.kind is OpKind.WRITE:
                return True
            if other.returned != op.argument or type(other.returned) is not type(op.argument):
                return False
        return True

    def respond(self, op_id, choice=None, now=0):
        op = self._pending(op_id)
        log = self.log(op.register)
        if choice is None:
            choice = InsertionChoice(len(log))
        legal = {c.position for c, _ in self.legal_insertions(op_id)}
        if choice.position not in legal:
            raise IllegalInsertion(
                f"position {choice.position} for op {op_id} on {op.register}; legal {sorted(legal)}"
            )
        if now <= op.invoked_at:
            raise IllegalInsertion("an operation cannot respond in the decision that invoked it")
        self._commit(op_id, choice.position)
        return self._finish(op_id, now)


_BACKENDS = {
    BackendKind.ATOMIC: AtomicBackend,
    BackendKind.STRONG: StrongLinBackend,
    BackendKind.LINEARIZABLE: MerelyLinBackend,
}


def make_backend(kind: BackendKind | str, record_snapshots: bool = True) -> RegisterBackend:
    return _BACKENDS[BackendKind.parse(kind)](record_snapshots=record_snapshots)
