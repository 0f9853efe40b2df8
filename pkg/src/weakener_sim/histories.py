"""Event histories, trace (de)serialisation and the two executable checkers.

A trace is a sequence of :class:`Event` records.  Register operations are
recovered from it without any op identifiers: each process has at most one
operation in flight, so ``invoke``/``commit``/``respond`` events of the same
pid pair up in order.  An ``invoke`` with ``value`` null is a read; any other
value is the argument of a write.

Operation ids are assigned in invoke order, which matches the ids the
register backends hand out during a run.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Any, Iterable, Optional, Sequence

from .registers import BOT, Bottom, OpKind, RegisterId, initial_value

EVENT_KINDS = ("invoke", "respond", "commit", "coin", "guard", "exit", "return", "nop")
TRACE_FIELDS = ("clock", "pid", "kind", "register", "round", "value", "insertion_index")

# within one decision: invoke before commit before respond
_RANK = {"coin": 0, "invoke": 1, "commit": 2, "respond": 3}


class UnknownOp(KeyError):
    pass


class BoundExceeded(Exception):
    pass


class MalformedHistory(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    clock: int
    pid: int
    kind: str
    register: Optional[str] = None
    round: Optional[int] = None
    value: Any = None
    insertion_index: Optional[int] = None

    @property
    def register_id(self) -> Optional[RegisterId]:
        if self.register is None:
            return None
        return RegisterId(self.register, self.round)


@dataclass(frozen=True)
class Operation:
    op_id: int
    pid: int
    register: RegisterId
    kind: OpKind
    argument: Any
    invoked_at: int
    responded_at: Optional[int] = None
    returned: Any = None
    commit_index: Optional[int] = None

    @property
    def pending(self) -> bool:
        return self.responded_at is None


@dataclass(frozen=True)
class LinearizationWitness:
    register: RegisterId
    order: tuple[int, ...]


def _encode(value: Any) -> Any:
    return "bot" if value is BOT else value


def _decode(value: Any) -> Any:
    return BOT if value == "bot" else value


def event_to_json(event: Event) -> str:
    record = asdict(event)
    record["value"] = _encode(record["value"])
    return json.dumps({k: record[k] for k in TRACE_FIELDS}, separators=(",", ":"))


def event_from_json(line: str) -> Event:
    record = json.loads(line)
    record["value"] = _decode(record["value"])
    return Event(**{k: record[k] for k in TRACE_FIELDS})


@dataclass
class History:
    events: list[Event] = field(default_factory=list)

    def append(self, event: Event) -> None:
        self.events.append(event)
        for cached in ("operations", "_by_register", "_snapshots"):
            self.__dict__.pop(cached, None)

    def to_ndjson(self) -> str:
        return "".join(event_to_json(e) + "\n" for e in self.events)

    @classmethod
    def from_ndjson(cls, text: str | Iterable[str]) -> "History":
        lines = text.splitlines() if isinstance(text, str) else text
        return cls([event_from_json(line) for line in lines if line.strip()])

    def ordered(self) -> list[Event]:
        # stable; only events sharing a clock can move
        return sorted(self.events, key=lambda e: (e.clock, _RANK.get(e.kind, 4)))

    @cached_property
    def operations(self) -> dict[int, Operation]:
        ops: dict[int, dict] = {}
        open_op: dict[int, int] = {}
        for event in self.ordered():
            if event.kind == "invoke":
                if event.pid in open_op:
                    raise MalformedHistory(f"p{event.pid} overlaps two operations")
                op_id = len(ops)
                kind = OpKind.READ if event.value is None else OpKind.WRITE
                ops[op_id] = dict(
                    op_id=op_id, pid=event.pid, register=event.register_id, kind=kind,
                    argument=event.value, invoked_at=event.clock,
                )
                open_op[event.pid] = op_id
            elif event.kind in ("commit", "respond"):
                op_id = open_op.get(event.pid)
                if op_id is None:
                    raise MalformedHistory(f"{event.kind} by p{event.pid} without invocation")
                if event.kind == "commit":
                    ops[op_id]["commit_index"] = event.insertion_index
                    if ops[op_id]["kind"] is OpKind.READ:
                        ops[op_id]["returned"] = event.value
                else:
                    ops[op_id]["responded_at"] = event.clock
                    ops[op_id]["returned"] = event.value
                    del open_op[event.pid]
        return {i: Operation(**d) for i, d in ops.items()}

    @cached_property
    def _by_register(self) -> dict[RegisterId, list[Operation]]:
        groups: dict[RegisterId, list[Operation]] = {}
        for op in self.operations.values():
            groups.setdefault(op.register, []).append(op)
        return groups

    def registers(self) -> list[RegisterId]:
        return sorted(self._by_register)

    def subhistory(self, register: RegisterId) -> list[Operation]:
        return list(self._by_register.get(register, ()))

    @cached_property
    def _snapshots(self) -> dict[RegisterId, list[tuple[int, ...]]]:
        logs: dict[RegisterId, list[int]] = {}
        out: dict[RegisterId, list[tuple[int, ...]]] = {}
        open_op: dict[int, int] = {}
        next_id = 0
        for event in self.ordered():
            if event.kind == "invoke":
                open_op[event.pid] = next_id
                next_id += 1
            elif event.kind == "commit":
                register = event.register_id
                log = logs.setdefault(register, [])
                log.insert(event.insertion_index, open_op[event.pid])
                out.setdefault(register, []).append(tuple(log))
            elif event.kind == "respond":
                open_op.pop(event.pid, None)
        return out

    def snapshots(self, register: RegisterId) -> list[tuple[int, ...]]:
        """Log states of ``register`` after each commit, rebuilt from insertion indices."""
        return list(self._snapshots.get(register, ()))


def real_time_precedes(h: History, a: int, b: int) -> bool:
    ops = h.operations
    if a not in ops or b not in ops:
        raise UnknownOp(a if a not in ops else b)
    first, second = ops[a], ops[b]
    return first.responded_at is not None and first.responded_at < second.invoked_at


def is_linearizable(h: History, register: RegisterId, bound: int = 10) -> Optional[LinearizationWitness]:
    """Brute-force search for a legal sequential order of one register's operations.

    Completed operations must all appear.  Pending writes may be completed or
    dropped; pending reads are dropped, since their return value is unknown.
    """
    ops = [op for op in h.subhistory(register) if not (op.pending and op.kind is OpKind.READ)]
    if len(ops) > bound:
        raise BoundExceeded(f"{len(ops)} operations on {register} exceed bound {bound}")
    required = frozenset(op.op_id for op in ops if not op.pending)
    by_id = {op.op_id: op for op in ops}
    # ids of completed ops that must come before each op
    before = {
        op.op_id: frozenset(
            o.op_id for o in ops
            if o.responded_at is not None and o.responded_at < op.invoked_at
        )
        for op in ops
    }
    failed: set[tuple[frozenset, Any]] = set()

    def search(done: frozenset, order: tuple[int, ...], value: Any) -> Optional[tuple[int, ...]]:
        if required <= done:
            return order
        key = (done, _key(value))
        if key in failed:
            return None
        for op in ops:
            if op.op_id in done or not before[op.op_id] <= done:
                continue
            if op.kind is OpKind.READ:
                if not _same(op.returned, value):
                    continue
                found = search(done | {op.op_id}, order + (op.op_id,), value)
            else:
                found = search(done | {op.op_id}, order + (op.op_id,), op.argument)
            if found is not None:
                return found
        failed.add(key)
        return None

    order = search(frozenset(), (), initial_value(register))
    if order is None:
        return None
    assert all(by_id[i].register == register for i in order)
    return LinearizationWitness(register, order)


def _key(value: Any) -> tuple[str, Any]:
    return (type(value).__name__, value)


def _same(a: Any, b: Any) -> bool:
    # True == 1 in Python; register values of different types never match
    return type(a) is type(b) and a == b


def check_prefix_property(snapshots: Sequence[Sequence[int]]) -> bool:
    """True iff every snapshot is a prefix of every later one."""
    for earlier, later in zip(snapshots, snapshots[1:]):
        if tuple(later[: len(earlier)]) != tuple(earlier):
            return False
    # prefix-of is transitive, so consecutive pairs suffice
    return True


def check_history(h: History, bound: int = 10) -> list[dict]:
    """Run both checkers on every register of ``h``; one verdict record per register."""
    verdicts = []
    for register in h.registers():
        witness = is_linearizable(h, register, bound)
        snaps = h.snapshots(register)
        verdicts.append(
            {
                "register": str(register),
                "verdict": witness is not None,
                "witness": list(witness.order) if witness else None,
                "counterexample": None if witness else [op.op_id for op in h.subhistory(register)],
                "prefix": check_prefix_property(snaps),
            }
        )
    return verdicts


__all__ = [
    "Bottom", "BoundExceeded", "EVENT_KINDS", "Event", "History", "LinearizationWitness",
    "MalformedHistory", "Operation", "TRACE_FIELDS", "UnknownOp", "check_history",
    "check_prefix_property", "event_from_json", "event_to_json", "is_linearizable",
    "real_time_precedes",
]
