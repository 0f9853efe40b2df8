"""The weakener gadget as process programs, its guards, and program composition.

Processes 0 and 1 are *writers*: each round they write their id into
``R1[j]`` (process 0 then flips a coin into ``C1[j]``), read ``R2[j]`` and
leave the loop if it is still false.  Processes 2..n-1 are *checkers*: they
read ``R1[j]`` twice and ``C1[j]`` once, leave unless the two reads match the
coin in the "first c, then 1-c" pattern, and otherwise set ``R2[j]`` to
true, which keeps the writers going for another round.

Programs are immutable transition tables over :class:`ProcessState`; one
kernel decision executes exactly one program line.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Any, Callable, Sequence

from .process import Effect, Invoke, Local, ProcessState, Status
from .registers import BOT, OpKind, RegisterId

Flip = Callable[[], int]


class Role(str, enum.Enum):
    WRITER = "writer"
    CHECKER = "checker"
    TASK = "task"
    EMPTY = "empty"
    COMPOSED = "composed"


class Verdict(str, enum.Enum):
    EXIT = "exit"
    CONTINUE = "continue"


class BadIndex(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


def _is_int(x: Any) -> bool:
    return type(x) is int


@dataclass(frozen=True)
class GuardInputsP1:
    u1: Any
    u2: Any
    c1: int

    def __post_init__(self) -> None:
        for name in ("u1", "u2"):
            value = getattr(self, name)
            if not (value is BOT or (_is_int(value) and value in (0, 1))):
                raise ValueError(f"{name}={value!r} outside {{⊥, 0, 1}}")
        if not (_is_int(self.c1) and self.c1 in (-1, 0, 1)):
            raise ValueError(f"c1={self.c1!r} outside {{-1, 0, 1}}")


def phase1_guard(g: GuardInputsP1) -> Verdict:
    # BOT compares unequal to every integer, including 1 - (-1) == 2
    if g.u1 != g.c1 or g.u2 != 1 - g.c1:
        return Verdict.EXIT
    return Verdict.CONTINUE


def phase2_guard(v1: bool) -> Verdict:
    if type(v1) is not bool:
        raise ValueError(f"v1={v1!r} is not a boolean")
    return Verdict.EXIT if v1 is False else Verdict.CONTINUE


def _next_round(state: ProcessState, line: str) -> ProcessState:
    return replace(state, round=state.round + 1, line=line, u1=None, u2=None, c1=None, v1=None, coin=None)


class ProcessProgram:
    """Transition function for one process.

    ``step`` executes the current line and returns the new state plus the
    effect the kernel must carry out; lines that invoke a register operation
    leave ``line`` unchanged and ``resume`` advances it once the response
    value arrives.
    """

    role: Role
    first_line = "return"
    # (register operations, local steps) in one full round that does not exit
    round_profile = (0, 1)

    def initial(self, pid: int) -> ProcessState:
        return ProcessState(pid=pid, line=self.first_line)

    def step(self, state: ProcessState, flip: Flip) -> tuple[ProcessState, Effect]:
        if state.line == "exit":
            return replace(state, line="return"), Local("exit")
        if state.line == "return":
            return replace(state, status=Status.RETURNED), Local("return")
        raise AssertionError(f"unknown line {state.line!r}")

    def resume(self, state: ProcessState, value: Any) -> ProcessState:
        raise AssertionError(f"no operation outstanding at line {state.line!r}")


class EmptyProgram(ProcessProgram):
    role = Role.EMPTY


class WriterProgram(ProcessProgram):
    role = Role.WRITER
    first_line = "write_r1"

    def __init__(self, i: int) -> None:
        self.i = i
        self.round_profile = (3, 1) if i == 0 else (2, 1)

    def step(self, state, flip):
        j = state.round
        line = state.line
        if line == "write_r1":
            return state, Invoke(RegisterId("R1", j), OpKind.WRITE, self.i)
        if line == "flip_c1":
            coin = flip()
            return replace(state, coin=coin), Invoke(RegisterId("C1", j), OpKind.WRITE, coin)
        if line == "read_r2":
            return state, Invoke(RegisterId("R2", j), OpKind.READ)
        if line == "guard2":
            verdict = phase2_guard(state.v1)
            if verdict is Verdict.EXIT:
                return replace(state, line="exit"), Local("guard", verdict.value)
            return _next_round(state, "write_r1"), Local("guard", verdict.value)
        return super().step(state, flip)

    def resume(self, state, value):
        if state.line == "write_r1":
            return replace(state, line="flip_c1" if self.i == 0 else "read_r2")
        if state.line == "flip_c1":
            return replace(state, line="read_r2")
        if state.line == "read_r2":
            return replace(state, v1=value, line="guard2")
        return super().resume(state, value)


class CheckerProgram(ProcessProgram):
    role = Role.CHECKER
    first_line = "read_u1"
    round_profile = (4, 1)

    _READS = {"read_u1": ("R1", "u1", "read_u2"), "read_u2": ("R1", "u2", "read_c1"), "read_c1": ("C1", "c1", "guard1")}

    def step(self, state, flip):
        line = state.line
        if line in self._READS:
            return state, Invoke(RegisterId(self._READS[line][0], state.round), OpKind.READ)
        if line == "guard1":
            verdict = phase1_guard(GuardInputsP1(state.u1, state.u2, state.c1))
            nxt = "exit" if verdict is Verdict.EXIT else "write_r2"
            return replace(state, line=nxt), Local("guard", verdict.value)
        if line == "write_r2":
            return state, Invoke(RegisterId("R2", state.round), OpKind.WRITE, True)
        return super().step(state, flip)

    def resume(self, state, value):
        if state.line in self._READS:
            _, var, nxt = self._READS[state.line]
            return replace(state, line=nxt, **{var: value})
        if state.line == "write_r2":
            return _next_round(state, "read_u1")
        return super().resume(state, value)


class TrivialTaskProgram(ProcessProgram):
    """Write own id to a private register, then return."""

    role = Role.TASK
    first_line = "write_t"
    round_profile = (1, 1)

    def step(self, state, flip):
        if state.line == "write_t":
            return state, Invoke(RegisterId(f"T{state.pid}", 0), OpKind.WRITE, state.pid)
        return super().step(state, flip)

    def resume(self, state, value):
        if state.line == "write_t":
            return replace(state, line="return")
        return super().resume(state, value)


class ComposedProgram(ProcessProgram):
    """Run each stage up to its return statement, then fall through to the next.

    The hand-off takes no step of its own: reaching a non-final stage's
    ``return`` line means the next step executes the following stage's first
    line.  So prefixing with an empty program leaves traces unchanged.
    """

    role = Role.COMPOSED

    def __init__(self, stages: Sequence[ProcessProgram]) -> None:
        self.stages = tuple(stages)
        self.first_line = self.stages[0].first_line
        self.round_profile = self.stages[0].round_profile

    def _enter_next(self, state: ProcessState) -> ProcessState:
        done = self.stages[state.stage]
        nxt = self.stages[state.stage + 1]
        spent = 0 if done.role is Role.EMPTY else state.round + 1
        return replace(
            nxt.initial(state.pid),
            stage=state.stage + 1,
            stage_rounds=state.stage_rounds + (spent,),
        )

    def step(self, state, flip):
        while state.line == "return" and state.stage < len(self.stages) - 1:
            state = self._enter_next(state)
        return self.stages[state.stage].step(state, flip)

    def resume(self, state, value):
        return self.stages[state.stage].resume(state, value)


@dataclass(frozen=True)
class ProgramFamily:
    name: str
    n: int
    programs: tuple[ProcessProgram, ...]

    def __post_init__(self) -> None:
        if len(self.programs) != self.n:
            raise ArityMismatch(f"{len(self.programs)} programs for n={self.n}")

    def __getitem__(self, pid: int) -> ProcessProgram:
        return self.programs[pid]

    @property
    def is_empty(self) -> bool:
        return all(p.role is Role.EMPTY for p in self.programs)


def weakener_program(i: int, n: int) -> ProcessProgram:
    if n < 3:
        raise BadIndex(f"the weakener needs n >= 3, got {n}")
    if not 0 <= i < n:
        raise BadIndex(f"process index {i} outside 0..{n - 1}")
    return WriterProgram(i) if i < 2 else CheckerProgram()


def weakener_family(n: int) -> ProgramFamily:
    return ProgramFamily("weakener", n, tuple(weakener_program(i, n) for i in range(n)))


def trivial_family(n: int) -> ProgramFamily:
    task = TrivialTaskProgram()
    return ProgramFamily("trivial", n, (task,) * n)


def empty_family(n: int) -> ProgramFamily:
    return ProgramFamily("empty", n, (EmptyProgram(),) * n)


def compose(prefix: ProgramFamily, main: ProgramFamily) -> ProgramFamily:
    if prefix.n != main.n:
        raise ArityMismatch(f"prefix has n={prefix.n}, main has n={main.n}")
    programs = []
    for first, second in zip(prefix.programs, main.programs):
        stages: list[ProcessProgram] = []
        for p in (first, second):
            stages.extend(p.stages if isinstance(p, ComposedProgram) else (p,))
        programs.append(ComposedProgram(stages))
    return ProgramFamily(f"{prefix.name}+{main.name}", prefix.n, tuple(programs))


PROGRAMS = ("weakener", "weakener+trivial", "trivial")


def program_family(name: str, n: int) -> ProgramFamily:
    if name == "weakener":
        return weakener_family(n)
    if name == "trivial":
        return trivial_family(n)
    if name == "weakener+trivial":
        return compose(weakener_family(n), trivial_family(n))
    raise ValueError(f"unknown program {name!r}; choose from {', '.join(PROGRAMS)}")
