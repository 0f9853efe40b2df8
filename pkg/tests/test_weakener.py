import itertools
import re

import pytest
from hypothesis import given, strategies as st

from weakener_sim.adversary import fair_scheduler, theorem1_adversary
from weakener_sim.harness import writer_gate_violations
from weakener_sim.kernel import SimConfig, Simulation, run
from weakener_sim.registers import BOT, BackendKind, RegisterId
from weakener_sim.weakener import (
    ArityMismatch,
    BadIndex,
    CheckerProgram,
    GuardInputsP1,
    Role,
    Verdict,
    WriterProgram,
    compose,
    empty_family,
    phase1_guard,
    phase2_guard,
    program_family,
    trivial_family,
    weakener_family,
    weakener_program,
)

U_VALUES = (BOT, 0, 1)
C_VALUES = (-1, 0, 1)


def continue_expected(u1, u2, c1):
    # a checker stays only if it saw c1 first and 1-c1 second, with c1 a real coin
    return (c1 == 0 and u1 == 0 and u2 == 1) or (c1 == 1 and u1 == 1 and u2 == 0)


def test_phase1_guard_truth_table():
    combos = list(itertools.product(U_VALUES, U_VALUES, C_VALUES))
    assert len(combos) == 27
    continuing = []
    for u1, u2, c1 in combos:
        got = phase1_guard(GuardInputsP1(u1, u2, c1))
        expected = Verdict.CONTINUE if continue_expected(u1, u2, c1) else Verdict.EXIT
        assert got is expected, (u1, u2, c1)
        if got is Verdict.CONTINUE:
            continuing.append((u1, u2, c1))
    assert continuing == [(0, 1, 0), (1, 0, 1)]


@pytest.mark.parametrize(
    "u1,u2,c1,verdict",
    [
        (0, 1, 0, Verdict.CONTINUE),
        (1, 0, 1, Verdict.CONTINUE),
        (BOT, 0, -1, Verdict.EXIT),
        (0, 0, 0, Verdict.EXIT),
    ],
)
def test_phase1_guard_examples(u1, u2, c1, verdict):
    assert phase1_guard(GuardInputsP1(u1, u2, c1)) is verdict


@pytest.mark.parametrize("u2", U_VALUES)
@pytest.mark.parametrize("u1", U_VALUES)
def test_unwritten_coin_always_exits(u1, u2):
    assert phase1_guard(GuardInputsP1(u1, u2, -1)) is Verdict.EXIT


def test_guard_input_domains():
    for bad in [(2, 0, 0), (0, -1, 0), (0, 0, 2), (0, 0, BOT), (True, 0, 0)]:
        with pytest.raises(ValueError):
            GuardInputsP1(*bad)


def test_phase2_guard():
    assert phase2_guard(False) is Verdict.EXIT
    assert phase2_guard(True) is Verdict.CONTINUE
    with pytest.raises(ValueError):
        phase2_guard(0)


def test_program_roles():
    p0, p1, p2 = (weakener_program(i, 3) for i in range(3))
    assert isinstance(p0, WriterProgram) and p0.i == 0
    assert isinstance(p1, WriterProgram) and p1.i == 1
    assert isinstance(p2, CheckerProgram) and p2.role is Role.CHECKER
    with pytest.raises(BadIndex):
        weakener_program(3, 3)
    with pytest.raises(BadIndex):
        weakener_program(0, 2)


def _lines(pid, n=3):
    """Lines executed by ``pid`` in a run where the others are never scheduled."""
    sim = Simulation(SimConfig(n=n, backend_kind=BackendKind.ATOMIC, seed=1))
    from weakener_sim.kernel import StepProcess

    lines = []
    while not sim.processes[pid].returned:
        lines.append(sim.processes[pid].line)
        sim.apply(StepProcess(pid))
    return lines, sim


def test_writer0_flips_and_writer1_does_not():
    lines0, sim0 = _lines(0)
    assert lines0 == ["write_r1", "flip_c1", "read_r2", "guard2", "exit", "return"]
    assert len(sim0.coins) == 1
    lines1, sim1 = _lines(1)
    assert lines1 == ["write_r1", "read_r2", "guard2", "exit", "return"]
    assert sim1.coins == []
    assert sim1.backend.value(RegisterId("R1", 0)) == 1


def test_checker_solo_exits_on_unwritten_coin():
    lines, sim = _lines(2)
    assert lines == ["read_u1", "read_u2", "read_c1", "guard1", "exit", "return"]
    st = sim.processes[2]
    assert (st.u1, st.u2, st.c1) == (BOT, BOT, -1)


def test_compose_arity():
    with pytest.raises(ArityMismatch):
        compose(weakener_family(3), trivial_family(4))


def test_program_family_names():
    assert program_family("weakener", 4).name == "weakener"
    assert program_family("weakener+trivial", 4).name == "weakener+trivial"
    with pytest.raises(ValueError):
        program_family("consensus", 3)


@pytest.mark.parametrize("backend", list(BackendKind))
def test_empty_prefix_is_identity(backend):
    main = trivial_family(3)
    traces = []
    for family in (main, compose(empty_family(3), main)):
        sim = Simulation(SimConfig(n=3, backend_kind=backend, seed=5), programs=family)
        traces.append(run(sim, fair_scheduler(5)).trace.events)
    assert traces[0] == traces[1]


def test_composed_runs_main_after_weakener():
    family = compose(weakener_family(3), trivial_family(3))
    sim = Simulation(SimConfig(n=3, backend_kind=BackendKind.STRONG, seed=3), programs=family)
    result = run(sim, fair_scheduler(3))
    assert result.all_returned
    assert result.stages == (1, 1, 1)
    task_regs = {r.name for r in result.trace.registers() if r.name.startswith("T")}
    assert task_regs == {"T0", "T1", "T2"}
    # weakener registers and task registers are disjoint
    assert not task_regs & {"R1", "R2", "C1"}


# -- control flow against a reference reading of the algorithm ---------------

# one iteration per round, each token followed by a space
WRITER0 = re.compile(r"(W1 C R\? G(c|e X T) )*")
WRITER1 = re.compile(r"(W1 R\? G(c|e X T) )*")
CHECKER = re.compile(r"(R\? R\? R\? G(c W2|e X T) )*")


def _tokens(events, pid):
    out = []
    for e in events:
        if e.pid != pid:
            continue
        if e.kind == "invoke":
            if e.register == "R1" and e.value is not None:
                out.append("W1")
            elif e.register == "C1" and e.value is not None:
                out.append("")  # coin event already stands for the C1 write
            elif e.register == "R2" and e.value is True:
                out.append("W2")
            else:
                out.append("R?")
        elif e.kind == "coin":
            out.append("C")
        elif e.kind == "guard":
            out.append("Gc" if e.value == "continue" else "Ge")
        elif e.kind == "exit":
            out.append("X")
        elif e.kind == "return":
            out.append("T")
    return "".join(t + " " for t in out if t)


@given(st.integers(0, 2**32), st.sampled_from(list(BackendKind)), st.integers(3, 6))
def test_trace_follows_program_order(seed, backend, n):
    sim = Simulation(SimConfig(n=n, backend_kind=backend, seed=seed, rounds_cap=6))
    result = run(sim, fair_scheduler(seed))
    events = result.trace.events
    # runs end with every process returned or halted at a round boundary
    assert result.stop_reason in ("returned", "rounds-cap")
    for pid in range(n):
        text = _tokens(events, pid)
        pattern = WRITER0 if pid == 0 else WRITER1 if pid == 1 else CHECKER
        assert pattern.fullmatch(text), (pid, text)
    # coins only at p0
    assert all(e.pid == 0 for e in events if e.kind == "coin")


def test_adversarial_trace_follows_program_order():
    sim = Simulation(SimConfig(n=5, backend_kind=BackendKind.LINEARIZABLE, seed=1, rounds_cap=4))
    events = run(sim, theorem1_adversary(5)).trace.events
    for pid in range(5):
        text = _tokens(events, pid)
        pattern = WRITER0 if pid == 0 else WRITER1 if pid == 1 else CHECKER
        assert pattern.fullmatch(text), (pid, text)


@given(st.integers(0, 2**32), st.sampled_from(list(BackendKind)), st.integers(3, 6))
def test_writers_wait_for_r2_write(seed, backend, n):
    sim = Simulation(SimConfig(n=n, backend_kind=backend, seed=seed, rounds_cap=8))
    assert writer_gate_violations(run(sim, fair_scheduler(seed)).trace) == []


def test_writer_gate_detects_counterexample():
    from weakener_sim.histories import Event, History

    fake = History([Event(0, 0, "invoke", "R1", 1, 0, None)])
    assert writer_gate_violations(fake) == [0]


@given(st.integers(0, 2**32), st.integers(3, 6))
def test_atomic_checkers_never_see_both_orders(seed, n):
    sim = Simulation(SimConfig(n=n, backend_kind=BackendKind.ATOMIC, seed=seed, rounds_cap=6))
    result = run(sim, fair_scheduler(seed))
    h = result.trace
    for register in h.registers():
        if register.name != "R1":
            continue
        ops = h.subhistory(register)
        log = result.snapshots[register][-1]
        pos = {op_id: i for i, op_id in enumerate(log)}
        w0 = next((o.op_id for o in ops if o.pid == 0), None)
        w1 = next((o.op_id for o in ops if o.pid == 1), None)
        seen = set()
        for pid in range(2, n):
            reads = [o.returned for o in ops if o.pid == pid and not o.pending]
            if len(reads) == 2:
                seen.add(tuple(reads))
        assert not {(0, 1), (1, 0)} <= seen
        if (0, 1) in seen:
            assert pos[w0] < pos[w1]
        if (1, 0) in seen:
            assert pos[w1] < pos[w0]


@given(st.integers(0, 2**32), st.sampled_from(list(BackendKind)), st.integers(3, 5))
def test_checker_seeing_unwritten_coin_exits(seed, backend, n):
    sim = Simulation(SimConfig(n=n, backend_kind=backend, seed=seed, rounds_cap=6))
    events = run(sim, fair_scheduler(seed)).trace.events
    saw_unset: dict[tuple[int, int], bool] = {}
    for e in events:
        if e.kind == "respond" and e.register == "C1" and e.pid >= 2:
            saw_unset[(e.pid, e.round)] = e.value == -1
        if e.kind == "guard" and e.pid >= 2 and saw_unset.get((e.pid, e.round)):
            assert e.value == "exit"
