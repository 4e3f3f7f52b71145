"""Deterministic discrete-event execution of scenarios.

Logical integer ticks replace wall-clock time; asynchrony between runs is
modeled as a reproducible interleaving. Within one tick, queued actions
(priority class 0) drain in schedule order, then enabled rules evaluate
once each in definition order (class 1), then any class-0 actions the
rules scheduled for the same tick drain. Two executions of one scenario
therefore produce byte-identical traces.

Step effects apply at the step's end tick; a step occupies the half-open
interval [start, start + duration). A step's preconditions are checked at
its start tick; a failure marks the run Broken. Interrupting a run
cancels its actions at strictly later ticks, so a step ending exactly at
the interrupt tick still applies.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from enum import Enum

from .dynamics import (
    LinkTemplate,
    StatePredicate,
    Wildcard,
    WorkflowStep,
    Workflow,
    Cond,
    Loop,
    Seq,
    Step,
    _resolve,
    _resolve_duration,
    activate_frame,
    apply_edits,
    apply_transitional,
    deactivate_frame,
    param_kinds,
)
from .errors import (
    InvalidInitialLinkError,
    NotInterruptibleError,
    PreconditionFailedError,
    ResolveError,
    SimulationError,
    XfoError,
)
from .relations import World
from .trace import TraceEvent

# Ceiling on zero-duration step churn within one tick; a run that exceeds
# it is livelocked model content, not a schedulable program.
SPIN_LIMIT = 10_000


class RunStatus(str, Enum):
    PENDING = "Pending"
    RUNNING = "Running"
    COMPLETED = "Completed"
    INTERRUPTED = "Interrupted"
    BROKEN = "Broken"


TERMINAL = (RunStatus.COMPLETED, RunStatus.INTERRUPTED, RunStatus.BROKEN)


@dataclass(frozen=True)
class RunSpec:
    workflow: str
    args: tuple  # entity names and ints, positionally matching the params
    at: int


@dataclass(frozen=True)
class ActivateDirective:
    frame: str
    binding: tuple  # sorted (slot, value) pairs
    at: int


@dataclass(frozen=True)
class DeactivateDirective:
    frame: str
    binding: tuple
    at: int


@dataclass(frozen=True)
class ApplyDirective:
    transitional: str
    at: int


@dataclass(frozen=True)
class InterruptDirective:
    run: int
    at: int


@dataclass(frozen=True)
class Scenario:
    """A closed microworld: initial links, scheduled runs and directives,
    enabled rules, and a mandatory horizon."""

    name: str
    horizon: int
    init: tuple[LinkTemplate, ...]
    schedule: tuple  # RunSpecs and directives in source order
    rules: tuple[str, ...] = ()

    def run_specs(self) -> list[RunSpec]:
        return [item for item in self.schedule if isinstance(item, RunSpec)]


class WorkflowRun:
    """One execution of a workflow within a scenario."""

    def __init__(self, run_id: int, workflow: Workflow, binding: dict):
        self.id = run_id
        self.workflow = workflow
        self.binding = binding
        self.status = RunStatus.PENDING
        self.cursor = _Cursor(workflow.body)
        self.last_completed_step: str | None = None
        self.cancelled_after: int | None = None
        self._spin = (0, 0)  # (tick, steps begun this tick)


class _Cursor:
    """Walks a workflow control tree, yielding the next step on demand.

    Loop and conditional guards are evaluated at the tick control reaches
    them.
    """

    def __init__(self, body: Seq):
        self._stack: list[list] = [["seq", body, 0]]

    def next_step(self, world: World, tick: int, binding: dict, horizon: int) -> WorkflowStep | None:
        while self._stack:
            frame = self._stack[-1]
            if frame[0] == "seq":
                node, idx = frame[1], frame[2]
                if idx >= len(node.items):
                    self._stack.pop()
                    continue
                frame[2] += 1
                item = node.items[idx]
                if isinstance(item, Step):
                    return item.step
                if isinstance(item, Seq):
                    self._stack.append(["seq", item, 0])
                elif isinstance(item, Loop):
                    self._stack.append(["loop", item, 0])
                elif isinstance(item, Cond):
                    if item.guard.holds(world, tick, binding):
                        self._stack.append(["seq", item.then_body, 0])
                    elif item.else_body is not None:
                        self._stack.append(["seq", item.else_body, 0])
            else:  # loop
                node, done = frame[1], frame[2]
                if node.count is not None:
                    again = done < node.count
                elif node.guard is not None:
                    again = not node.guard.holds(world, tick, binding)
                else:  # until_end: rescheduled while the horizon allows
                    again = tick <= horizon
                if not again:
                    self._stack.pop()
                    continue
                frame[2] += 1
                self._stack.append(["seq", node.body, 0])
        return None


class _Queue:
    """Total-ordered action queue: (tick, priorityClass, scheduleSeq)."""

    def __init__(self):
        self._heap: list = []
        self._seq = 0

    def push(self, tick: int, action: tuple, priority: int = 0) -> None:
        heapq.heappush(self._heap, (tick, priority, self._seq, action))
        self._seq += 1

    def pop_at(self, tick: int):
        if self._heap and self._heap[0][0] == tick:
            return heapq.heappop(self._heap)[3]
        return None

    def __len__(self):
        return len(self._heap)


def _render_pred(pred: StatePredicate, binding: dict) -> str:
    def side(ref):
        if isinstance(ref, Wildcard):
            return str(ref)
        return _resolve(ref, binding)

    word = "exists" if pred.exists else "not_exists"
    return f"{word} {side(pred.from_ref)} {pred.kind} {side(pred.to_ref)}"


def _build_binding(world: World, wf: Workflow, args: tuple, label: str) -> dict:
    if len(args) != len(wf.params):
        raise ResolveError(
            f"{label}: workflow '{wf.name}' takes {len(wf.params)} argument(s), got {len(args)}"
        )
    kinds = param_kinds(wf)
    binding = {}
    for param, value in zip(wf.params, args):
        want = kinds.get(param)
        if isinstance(value, int):
            if want == "entity":
                raise ResolveError(f"{label}: parameter '{param}' needs an entity, got {value}")
        else:
            if want == "count":
                raise ResolveError(f"{label}: parameter '{param}' needs a number, got '{value}'")
            if value not in world.registry:
                raise ResolveError(f"{label}: unknown entity '{value}' for parameter '{param}'")
        binding[param] = value
    return binding


class Simulation:
    """Executes one scenario over one world. Single-threaded by contract."""

    def __init__(self, world: World, scenario: Scenario):
        self.world = world
        self.scenario = scenario
        self.runs: list[WorkflowRun] = []
        self.queue = _Queue()
        self.now = 0  # next unprocessed tick
        self._rule_prev: dict[str, bool] = {}
        self._load()

    # ------------------------------------------------------------------
    # loading

    def _load(self) -> None:
        sc, world = self.scenario, self.world
        if sc.horizon <= 0:
            raise ResolveError(f"scenario '{sc.name}': horizon must be positive")
        for name in sc.rules:
            if name not in world.rules:
                raise ResolveError(f"scenario '{sc.name}': unknown rule '{name}'")
            self._rule_prev[name] = False
        for t in sc.init:
            try:
                world.link(t.from_ref, t.kind, t.to_ref, 0)
            except XfoError as exc:
                raise InvalidInitialLinkError(f"initial link '{t}': {exc}") from exc
        n_runs = sum(1 for item in sc.schedule if isinstance(item, RunSpec))
        for item in sc.schedule:
            if item.at > sc.horizon:
                raise ResolveError(f"scenario '{sc.name}': tick {item.at} is past the horizon")
            if isinstance(item, RunSpec):
                wf = world.workflows.get(item.workflow)
                if wf is None:
                    raise ResolveError(f"scenario '{sc.name}': unknown workflow '{item.workflow}'")
                binding = _build_binding(world, wf, item.args, f"scenario '{sc.name}'")
                run = WorkflowRun(len(self.runs), wf, binding)
                self.runs.append(run)
                self.queue.push(item.at, ("start", run.id))
            elif isinstance(item, ActivateDirective):
                self._check_frame_ref(item.frame, item.binding)
                self.queue.push(item.at, ("activate", item.frame, item.binding))
            elif isinstance(item, DeactivateDirective):
                self._check_frame_ref(item.frame, item.binding)
                self.queue.push(item.at, ("deactivate", item.frame, item.binding))
            elif isinstance(item, ApplyDirective):
                if item.transitional not in world.transitionals:
                    raise ResolveError(
                        f"scenario '{sc.name}': unknown transitional '{item.transitional}'"
                    )
                self.queue.push(item.at, ("apply", item.transitional))
            elif isinstance(item, InterruptDirective):
                if not 0 <= item.run < n_runs:
                    raise ResolveError(f"scenario '{sc.name}': no run with ordinal {item.run}")
                self.queue.push(item.at, ("interrupt", item.run))
            else:
                raise ResolveError(f"scenario '{sc.name}': unknown schedule item {item!r}")

    def _check_frame_ref(self, frame: str, binding: tuple) -> None:
        if frame not in self.world.frames:
            raise ResolveError(f"scenario '{self.scenario.name}': unknown frame '{frame}'")
        for _, value in binding:
            if value not in self.world.registry:
                raise ResolveError(f"scenario '{self.scenario.name}': unknown entity '{value}'")

    # ------------------------------------------------------------------
    # public operations

    def run_until(self, t: int) -> list[TraceEvent]:
        """Advance to the end of tick t and return the trace so far.

        Repeated calls with increasing t extend the same trace; a second
        call with a smaller t is a no-op.
        """
        if t > self.scenario.horizon:
            raise XfoError(f"run_until({t}): beyond scenario horizon {self.scenario.horizon}")
        while self.now <= t:
            tick = self.now
            self._drain(tick)
            self._rules_phase(tick)
            self._drain(tick)
            self.now += 1
        return list(self.world.trace)

    def interrupt(self, run_id: int, at: int):
        """Schedule an external interrupt of a run at tick `at`."""
        run = self._run(run_id)
        if run.status in TERMINAL:
            raise NotInterruptibleError(f"run {run_id} is already {run.status.value}")
        if at < self.now:
            raise NotInterruptibleError(f"tick {at} has already been processed")
        self.queue.push(at, ("interrupt", run_id))

    def detect_broken(self, run: WorkflowRun, step: WorkflowStep, tick: int) -> bool:
        """Check a step's preconditions at its start tick; on failure mark
        the run Broken, cancel its remaining actions, and record the
        failing predicate. The scheduler calls this at every step start."""
        for pred in step.preconditions:
            if not pred.holds(self.world, tick, run.binding):
                self._break(run, step.name, tick, _render_pred(pred, run.binding))
                return True
        return False

    def summary(self) -> list[tuple[int, str, str, str | None]]:
        """(id, workflow, status, lastCompletedStep) per run, in id order."""
        return [
            (r.id, r.workflow.name, r.status.value, r.last_completed_step)
            for r in self.runs
        ]

    # ------------------------------------------------------------------
    # internals

    def _run(self, run_id: int) -> WorkflowRun:
        if not 0 <= run_id < len(self.runs):
            raise XfoError(f"no run with ordinal {run_id}")
        return self.runs[run_id]

    def _drain(self, tick: int) -> None:
        while (action := self.queue.pop_at(tick)) is not None:
            self._execute(action, tick)

    def _execute(self, action: tuple, tick: int) -> None:
        world = self.world
        op = action[0]
        if op == "start":
            run = self.runs[action[1]]
            if run.status is not RunStatus.PENDING:
                return
            run.status = RunStatus.RUNNING
            world.record("WorkflowStart", tick, {"run": run.id, "workflow": run.workflow.name})
            self._begin_next_step(run, tick)
        elif op == "step_end":
            self._finish_step(self.runs[action[1]], action[2], tick)
        elif op == "activate":
            frame, binding = action[1], dict(action[2])
            try:
                activate_frame(world, frame, binding, tick)
            except XfoError as exc:
                raise SimulationError(f"activate '{frame}' at {tick}: {exc}") from exc
        elif op == "deactivate":
            frame, binding = action[1], dict(action[2])
            try:
                deactivate_frame(world, (frame, binding), tick)
            except XfoError as exc:
                raise SimulationError(f"deactivate '{frame}' at {tick}: {exc}") from exc
        elif op == "apply":
            tr = world.transitionals[action[1]]
            try:
                apply_transitional(world, tr, tick)
            except XfoError as exc:
                raise SimulationError(f"apply '{action[1]}' at {tick}: {exc}") from exc
        elif op == "interrupt":
            self._interrupt_now(self.runs[action[1]], tick)

    def _interrupt_now(self, run: WorkflowRun, tick: int) -> None:
        if run.status in TERMINAL:
            raise SimulationError(f"interrupt: run {run.id} is already {run.status.value}")
        run.status = RunStatus.INTERRUPTED
        run.cancelled_after = tick
        self.world.record(
            "Interrupt", tick,
            {"run": run.id, "workflow": run.workflow.name, "last": run.last_completed_step},
        )

    def _cancelled(self, run: WorkflowRun, tick: int) -> bool:
        return run.cancelled_after is not None and tick > run.cancelled_after

    def _begin_next_step(self, run: WorkflowRun, tick: int) -> None:
        spin_tick, spun = run._spin
        spun = spun + 1 if spin_tick == tick else 1
        run._spin = (tick, spun)
        if spun > SPIN_LIMIT:
            raise SimulationError(
                f"run {run.id} ('{run.workflow.name}') began {SPIN_LIMIT} steps at tick {tick}; "
                "zero-duration loop livelock"
            )
        step = run.cursor.next_step(self.world, tick, run.binding, self.scenario.horizon)
        if step is None:
            run.status = RunStatus.COMPLETED
            self.world.record(
                "WorkflowComplete", tick,
                {"run": run.id, "workflow": run.workflow.name, "last": run.last_completed_step},
            )
            return
        if self.detect_broken(run, step, tick):
            return
        self.world.record(
            "StepStart", tick, {"run": run.id, "workflow": run.workflow.name, "step": step.name}
        )
        duration = _resolve_duration(step.duration, run.binding)
        self.queue.push(tick + duration, ("step_end", run.id, step))

    def _finish_step(self, run: WorkflowRun, step: WorkflowStep, tick: int) -> None:
        if self._cancelled(run, tick):
            return
        boundary = run.status is RunStatus.INTERRUPTED and run.cancelled_after == tick
        if run.status is not RunStatus.RUNNING and not boundary:
            return
        try:
            apply_edits(
                self.world, step.unlinks, step.links, tick, run.binding,
                lenient=step.placeholder,
            )
        except PreconditionFailedError as exc:
            self._break(run, step.name, tick, exc.predicate or str(exc))
            return
        self.world.record(
            "StepEnd", tick, {"run": run.id, "workflow": run.workflow.name, "step": step.name}
        )
        run.last_completed_step = step.name
        if not boundary:
            self._begin_next_step(run, tick)

    def _break(self, run: WorkflowRun, step_name: str, tick: int, predicate: str) -> None:
        run.status = RunStatus.BROKEN
        run.cancelled_after = tick
        self.world.record(
            "WorkflowBroken", tick,
            {"run": run.id, "workflow": run.workflow.name, "step": step_name, "predicate": predicate},
        )

    def _rules_phase(self, tick: int) -> None:
        for name in self.world.rules:
            if name not in self._rule_prev:
                continue  # rule not enabled by this scenario
            rule = self.world.rules[name]
            holds = all(p.holds(self.world, tick) for p in rule.guard)
            if holds and not self._rule_prev[name]:
                self.world.record("RuleFired", tick, {"rule": name, "action": rule.action.render()})
                self._fire(rule, tick)
            self._rule_prev[name] = holds

    def _fire(self, rule, tick: int) -> None:
        world, action = self.world, rule.action
        try:
            if action.kind == "start_workflow":
                wf = world.workflows[action.target]
                binding = _build_binding(world, wf, action.args, f"rule '{rule.name}'")
                run = WorkflowRun(len(self.runs), wf, binding)
                self.runs.append(run)
                self.queue.push(tick, ("start", run.id))
            elif action.kind == "apply_transitional":
                apply_transitional(world, world.transitionals[action.target], tick)
            elif action.kind == "activate_frame":
                activate_frame(world, action.target, dict(action.binding), tick)
            else:
                deactivate_frame(world, (action.target, dict(action.binding)), tick)
        except XfoError as exc:
            raise SimulationError(f"rule '{rule.name}' action failed at {tick}: {exc}") from exc


def load_scenario(world: World, scenario: Scenario) -> Simulation:
    """Apply the scenario's initial links at tick 0 and enqueue its runs
    and directives; returns the ready-to-run simulation."""
    return Simulation(world, scenario)
