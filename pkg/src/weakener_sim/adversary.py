"""Schedulers: the retroactive-linearization adversary and a fair random scheduler."""

from __future__ import annotations

import enum
import random
from typing import Iterator, Optional

from .kernel import Observation, RespondOp, SchedulerDecision, StepProcess
from .registers import BackendKind, InsertionChoice, RegisterId, WrongBackend


class Phase(enum.IntEnum):
    """Schedule points of one adversarial round, in the order they are reached."""

    T0 = 0  # all phase-1 operations on R1[j] invoked
    T1 = 1  # p0's write of 0 responded
    TC = 2  # p0's coin written to C1[j]
    T2 = 3  # p1's write linearized according to the coin
    T3 = 4  # first checker reads linearized between the two writes
    T4 = 5  # second checker reads done
    T0_PRIME = 6  # p2 has written TRUE into R2[j]
    DONE = 7  # every process poised to enter round j+1


class TheoremOneAdversary:
    """Strong adversary that keeps every process looping on merely linearizable registers.

    Each round it invokes all ``R1[j]`` operations concurrently, lets p0
    finish its write and flip, and only then decides where p1's concurrent
    write goes: after p0's write on coin 0, before it on coin 1.  The
    checkers' first reads are placed between the two writes, so every checker
    sees ``u1 == c1`` and ``u2 == 1 - c1`` and writes ``R2[j]``.
    """

    def __init__(self, n: int) -> None:
        if n < 3:
            raise ValueError("needs n >= 3")
        self.n = n
        self.round = 0
        self.phase = Phase.T0
        self.coin: Optional[int] = None
        self._obs: Optional[Observation] = None
        self._plan: Optional[Iterator[SchedulerDecision]] = None

    def next_decision(self, obs: Observation) -> SchedulerDecision:
        if obs.backend_kind is not BackendKind.LINEARIZABLE:
            raise WrongBackend(
                f"the schedule needs retroactive insertion; {obs.backend_kind.value} registers only append"
            )
        self._obs = obs
        if self._plan is None:
            self._plan = self._schedule()
        return next(self._plan)

    def _append(self, pid: int) -> RespondOp:
        op = self._obs.pending_of(pid)
        return RespondOp(op.op_id, InsertionChoice(len(self._obs.log(op.register))))

    def _round(self, j: int) -> Iterator[SchedulerDecision]:
        checkers = range(2, self.n)
        r1 = RegisterId("R1", j)
        self.round, self.coin = j, None

        yield StepProcess(0)
        yield StepProcess(1)
        for k in checkers:
            yield StepProcess(k)
        self.phase = Phase.T0
        w0 = self._obs.pending_of(0).op_id
        w1 = self._obs.pending_of(1).op_id

        yield self._append(0)
        self.phase = Phase.T1
        yield StepProcess(0)  # flip, then invoke the C1[j] write
        self.coin = self._obs.processes[0].coin
        yield self._append(0)
        self.phase = Phase.TC

        at = self._obs.log(r1).index(w0)
        yield RespondOp(w1, InsertionChoice(at + 1 if self.coin == 0 else at))
        self.phase = Phase.T2
        # the write linearized second bounds the checkers' first reads from above
        second = w1 if self.coin == 0 else w0
        for k in checkers:
            read = self._obs.pending_of(k).op_id
            yield RespondOp(read, InsertionChoice(self._obs.log(r1).index(second)))
        self.phase = Phase.T3
        for k in checkers:
            yield StepProcess(k)
            yield self._append(k)
        self.phase = Phase.T4
        for k in checkers:
            yield StepProcess(k)  # read C1[j]
            yield self._append(k)
        for k in checkers:
            yield StepProcess(k)  # guard: continue

        yield StepProcess(2)
        yield self._append(2)
        self.phase = Phase.T0_PRIME
        for p in (0, 1):
            yield StepProcess(p)
            yield self._append(p)
            yield StepProcess(p)  # guard: v1 is TRUE, continue
        for k in range(3, self.n):
            yield StepProcess(k)
            yield self._append(k)
        self.phase = Phase.DONE

    def _schedule(self) -> Iterator[SchedulerDecision]:
        j = 0
        while True:
            yield from self._round(j)
            j += 1


def theorem1_adversary(n: int) -> TheoremOneAdversary:
    return TheoremOneAdversary(n)


def adversary_steps_per_round(n: int) -> int:
    """Decisions the adversary spends on one round."""
    return 12 + 9 * (n - 2)


class FairScheduler:
    """Uniform choice among productive decisions, then a uniform legal insertion."""

    def __init__(self, seed: int) -> None:
        self.rng = random.Random(seed)

    def next_decision(self, obs: Observation) -> SchedulerDecision:
        steps, responds = obs.steppable, obs.respondable
        pick = self.rng.randrange(len(steps) + len(responds))
        if pick < len(steps):
            return StepProcess(steps[pick])
        op_id = responds[pick - len(steps)]
        if obs.backend_kind is BackendKind.LINEARIZABLE:
            choices = obs.legal_insertions(op_id)
            return RespondOp(op_id, self.rng.choice(choices)[0])
        return RespondOp(op_id)


# keeps the scheduler's stream apart from the coin stream seeded with the same value
SCHEDULER_SEED_SALT = 0x9E3779B97F4A7C15


def fair_scheduler(seed: int) -> FairScheduler:
    return FairScheduler(seed ^ SCHEDULER_SEED_SALT)


SCHEDULERS = ("weakener-adversary", "fair")


def make_scheduler(name: str, n: int, seed: int):
    if name == "weakener-adversary":
        return theorem1_adversary(n)
    if name == "fair":
        return fair_scheduler(seed)
    raise ValueError(f"unknown scheduler {name!r}; choose from {', '.join(SCHEDULERS)}")
