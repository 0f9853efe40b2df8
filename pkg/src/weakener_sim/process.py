"""Per-process state and the effects a program step can request from the kernel."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Optional

from .registers import OpKind, RegisterId


class Status(str, enum.Enum):
    RUNNING = "running"
    RETURNED = "returned"


UNSET = None  # local variable not assigned yet; distinct from BOT


@dataclass(frozen=True)
class ProcessState:
    pid: int
    round: int = 0
    line: str = ""
    u1: Any = UNSET
    u2: Any = UNSET
    c1: Any = UNSET
    v1: Any = UNSET
    coin: Optional[int] = None
    status: Status = Status.RUNNING
    pending_op: Optional[int] = None
    # composed programs: index of the running stage and rounds spent in earlier ones
    stage: int = 0
    stage_rounds: tuple[int, ...] = ()

    @property
    def returned(self) -> bool:
        return self.status is Status.RETURNED


@dataclass(frozen=True)
class Invoke:
    register: RegisterId
    kind: OpKind
    argument: Any = None


@dataclass(frozen=True)
class Local:
    """A step with no shared-memory access: ``guard``, ``exit`` or ``return``."""

    kind: str
    value: Any = None


Effect = Invoke | Local
