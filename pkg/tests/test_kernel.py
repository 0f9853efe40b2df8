import pytest
from hypothesis import given, strategies as st

from weakener_sim.adversary import fair_scheduler, theorem1_adversary
from weakener_sim.kernel import (
    DisabledDecision,
    InvalidConfig,
    RespondOp,
    SimConfig,
    Simulation,
    StepProcess,
    apply,
    new_simulation,
    observe,
    run,
)
from weakener_sim.process import Status
from weakener_sim.registers import BOT, BackendKind, RegisterId


def test_new_simulation_initial_state():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.ATOMIC, seed=0))
    assert sim.clock == 0
    assert [st.status for st in sim.processes] == [Status.RUNNING] * 3


@pytest.mark.parametrize("bad", [dict(n=2), dict(steps_cap=0), dict(seed=-1), dict(seed=2**64), dict(rounds_cap=-1)])
def test_invalid_config(bad):
    with pytest.raises(InvalidConfig):
        new_simulation(SimConfig(**bad))


def test_initial_register_values():
    sim = new_simulation(SimConfig(n=8, backend_kind=BackendKind.LINEARIZABLE, seed=7))
    assert sim.backend.value(RegisterId("R1", 0)) is BOT
    assert sim.backend.value(RegisterId("C1", 0)) == -1
    assert sim.backend.value(RegisterId("R2", 0)) is False


def test_observe_is_pure_and_shows_past_coins():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.ATOMIC, seed=3))
    first = observe(sim)
    assert first.coins == ()
    assert observe(sim) == first
    apply(sim, StepProcess(0))  # write R1[0]
    outcome = apply(sim, StepProcess(0))  # flip, write C1[0]
    assert outcome.coin in (0, 1)
    assert observe(sim).coins == ((0, outcome.coin),)


def test_step_invokes_write_and_respond_appends_log():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.LINEARIZABLE, seed=0))
    out = apply(sim, StepProcess(0))
    assert [(e.kind, e.register, e.round, e.value) for e in out.events] == [("invoke", "R1", 0, 0)]
    op = observe(sim).pending_of(0)
    out = apply(sim, RespondOp(op.op_id))
    assert [e.kind for e in out.events] == ["commit", "respond"]
    assert out.events[-1].value is None
    assert sim.backend.log(RegisterId("R1", 0)) == (op.op_id,)


def test_nop_on_returned_process():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.ATOMIC, seed=0))
    while not sim.processes[2].returned:
        apply(sim, StepProcess(2))
    out = apply(sim, StepProcess(2))
    assert [e.kind for e in out.events] == ["nop"]
    # the scheduler is never offered NOPs
    assert 2 not in observe(sim).steppable


def test_disabled_decisions():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.STRONG, seed=0))
    with pytest.raises(DisabledDecision):
        apply(sim, RespondOp(0))
    with pytest.raises(DisabledDecision):
        apply(sim, StepProcess(5))
    apply(sim, StepProcess(0))
    with pytest.raises(DisabledDecision):
        apply(sim, RespondOp(0))  # not committed yet


def test_steps_cap_zero_gives_empty_run():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.STRONG, seed=0))
    result = run(sim, fair_scheduler(0), steps_cap=0)
    assert result.trace.events == []
    assert result.statuses == ("running",) * 3
    assert result.stop_reason == "steps-cap"


def test_strong_fair_run_returns():
    sim = new_simulation(SimConfig(n=4, backend_kind=BackendKind.STRONG, seed=11))
    assert run(sim, fair_scheduler(11)).all_returned


def test_adversary_run_never_returns():
    sim = new_simulation(SimConfig(n=3, backend_kind=BackendKind.LINEARIZABLE, seed=2, steps_cap=10**5))
    result = run(sim, theorem1_adversary(3))
    assert result.stop_reason == "steps-cap"
    assert not any(s == "returned" for s in result.statuses)
    assert min(result.rounds_completed) >= 1


@given(st.integers(0, 2**64 - 1), st.sampled_from(list(BackendKind)))
def test_same_seed_same_run(seed, backend):
    traces = []
    for _ in range(2):
        sim = Simulation(SimConfig(n=4, backend_kind=backend, seed=seed, rounds_cap=5))
        traces.append(run(sim, fair_scheduler(seed)).trace.to_ndjson())
    assert traces[0] == traces[1]


@given(st.integers(0, 2**32), st.sampled_from(list(BackendKind)))
def test_clock_is_monotone_and_one_per_decision(seed, backend):
    sim = Simulation(SimConfig(n=3, backend_kind=backend, seed=seed, rounds_cap=4))
    result = run(sim, fair_scheduler(seed))
    clocks = [e.clock for e in result.trace.events]
    assert clocks == sorted(clocks)
    assert sim.clock == result.steps


@given(st.integers(0, 2**32), st.integers(3, 5))
def test_clone_evolves_like_original(seed, n):
    sim = Simulation(SimConfig(n=n, backend_kind=BackendKind.STRONG, seed=seed, rounds_cap=3))
    sched = fair_scheduler(seed)
    for _ in range(15):
        obs = sim.observe()
        if not obs.steppable and not obs.respondable:
            break
        sim.apply(sched.next_decision(obs))
    twin = sim.clone()
    assert twin.state_key() == sim.state_key()
    obs = sim.observe()
    if obs.steppable:
        d = StepProcess(obs.steppable[0])
        out = sim.apply(d)
        twin.apply(d, coin=out.coin)
        assert twin.state_key() == sim.state_key()


class ZeroLatency:
    """Fair choice among processes; a StrongLin operation is committed and answered at once."""

    def __init__(self, seed):
        self.inner = fair_scheduler(seed)

    def next_decision(self, obs):
        for op in obs.pending:
            if op.op_id in obs.respondable:
                return RespondOp(op.op_id)
            return StepProcess(op.pid)
        return StepProcess(self.inner.rng.choice(obs.steppable))


def _shape(events):
    # atomic ops invoke, commit and respond in one decision; strip clocks so latency does not matter
    return [(e.pid, e.kind, e.register, e.round, e.value) for e in events]


@given(st.integers(0, 2**32), st.integers(3, 6))
def test_zero_latency_strong_matches_atomic(seed, n):
    shapes = []
    for backend in (BackendKind.ATOMIC, BackendKind.STRONG):
        sim = Simulation(SimConfig(n=n, backend_kind=backend, seed=seed, rounds_cap=6))
        shapes.append(_shape(run(sim, ZeroLatency(seed)).trace.events))
    assert shapes[0] == shapes[1]
