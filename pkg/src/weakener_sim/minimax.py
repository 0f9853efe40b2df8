"""Exact game value of round 0 against the strongest possible adversary.

The adversary picks every decision (which process steps, which pending
operation responds, and, for merely linearizable registers, where it is
linearized); nature picks p0's coin with probability 1/2 each.  The value is
the maximum over adversary strategies of the probability that some process
enters round 1, computed with :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .kernel import RespondOp, SimConfig, Simulation, StepProcess
from .registers import BackendKind
from .weakener import weakener_family

# decisions per register operation: invoke (+ internal commit) (+ respond)
_DECISIONS_PER_OP = {BackendKind.ATOMIC: 1, BackendKind.STRONG: 3, BackendKind.LINEARIZABLE: 2}


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MinimaxResult:
    backend: BackendKind
    n: int
    bound: int
    value: Fraction
    states: int

    def to_dict(self) -> dict:
        return {
            "backend": self.backend.value,
            "n": self.n,
            "bound": self.bound,
            "value": {"numerator": self.value.numerator, "denominator": self.value.denominator},
            "states": self.states,
        }


def default_bound(n: int, backend: BackendKind | str) -> int:
    """Decisions needed for every process to finish round 0 without exiting.

    Every productive decision advances some process or operation, so no
    schedule of round 0 is longer than this and the bound never truncates.
    """
    per_op = _DECISIONS_PER_OP[BackendKind.parse(backend)]
    total = 0
    for program in weakener_family(n).programs:
        ops, local = program.round_profile
        total += ops * per_op + local
    return total


def minimax_round_value(n: int = 3, backend: BackendKind | str = BackendKind.STRONG,
                        step_bound: int | None = None, budget: int = 5_000_000) -> MinimaxResult:
    backend = BackendKind.parse(backend)
    bound = default_bound(n, backend) if step_bound is None else step_bound
    root = Simulation(SimConfig(n=n, backend_kind=backend, program="weakener"), record=False)
    memo: dict[tuple, Fraction] = {}
    one = Fraction(1)

    def children(sim: Simulation):
        obs = sim.observe()
        for pid in obs.steppable:
            child = sim.clone()
            outcome = child.apply(StepProcess(pid), coin=0)
            if outcome.coin is None:
                yield [child]
            else:
                other = sim.clone()
                other.apply(StepProcess(pid), coin=1)
                yield [child, other]
        for op_id in obs.respondable:
            if backend is BackendKind.LINEARIZABLE:
                choices = [c for c, _ in sim.backend.legal_insertions(op_id)]
            else:
                choices = [None]
            for choice in choices:
                child = sim.clone()
                child.apply(RespondOp(op_id, choice))
                yield [child]

    def value(sim: Simulation, depth: int) -> Fraction:
        if any(st.round >= 1 for st in sim.processes):
            return one
        if depth == 0:
            return Fraction(0)
        key = (sim.state_key(), depth)
        cached = memo.get(key)
        if cached is not None:
            return cached
        if len(memo) >= budget:
            raise SearchBudgetExceeded(f"more than {budget} states at bound {bound}")
        best = Fraction(0)
        for outcomes in children(sim):
            v = sum((value(c, depth - 1) for c in outcomes), Fraction(0)) / len(outcomes)
            if v > best:
                best = v
                if best == one:
                    break
        memo[key] = best
        return best

    result = value(root, bound)
    return MinimaxResult(backend, n, bound, result, len(memo))
