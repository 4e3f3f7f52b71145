"""Transitionals, Frames, Workflows/Mechanisms and condition-action rules.

Link edits are atomic: an edit batch is prechecked in full before anything
is applied, so a failed batch leaves the link history untouched. Strict
edits carry implicit preconditions (an unlink needs its link active, a new
link needs validity and absence); placeholder steps apply their declared
postconditions leniently instead, asserting rather than checking them.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import (
    AlreadyActiveError,
    DuplicateNameError,
    IncompleteBindingError,
    InvalidLinkError,
    InvalidTemplateError,
    MissingAgentError,
    NotActiveError,
    PreconditionFailedError,
    ResolveError,
    UnboundedLoopError,
    UnknownActionError,
    UnknownEntityError,
    UnknownSlotError,
    XfoError,
)
from .ontology import Layer
from .relations import World
from .trace import TraceEvent

# A ref inside a template or predicate is a concrete entity name or, inside
# a workflow body, a formal parameter bound at instantiation.
Ref = str


@dataclass(frozen=True)
class Wildcard:
    """Predicate-side wildcard: any particular of the given universal."""

    utype: str

    def __str__(self) -> str:
        return f"any:{self.utype}"


PredRef = Union[str, Wildcard]


@dataclass(frozen=True)
class LinkTemplate:
    from_ref: Ref
    kind: str
    to_ref: Ref

    def resolve(self, binding: dict | None) -> tuple[str, str, str]:
        return (_resolve(self.from_ref, binding), self.kind, _resolve(self.to_ref, binding))

    def __str__(self) -> str:
        return f"{self.from_ref} {self.kind} {self.to_ref}"


@dataclass(frozen=True)
class StatePredicate:
    """Exists / NotExists over a link triple; sides may be wildcards."""

    exists: bool
    from_ref: PredRef
    kind: str
    to_ref: PredRef

    def render(self) -> str:
        word = "exists" if self.exists else "not_exists"
        return f"{word} {self.from_ref} {self.kind} {self.to_ref}"

    def holds(self, world: World, at: int, binding: dict | None = None) -> bool:
        found = self._match_world(world, at, binding)
        return found if self.exists else not found

    def _match_world(self, world: World, at: int, binding: dict | None) -> bool:
        for l in world.links:
            if l.kind != self.kind or not l.active_at(at):
                continue
            if self._side_matches(world, self.from_ref, l.from_p, binding) and self._side_matches(
                world, self.to_ref, l.to_p, binding
            ):
                return True
        return False

    @staticmethod
    def _side_matches(world: World, ref: PredRef, name: str, binding: dict | None) -> bool:
        if isinstance(ref, Wildcard):
            return world.registry.is_descendant(name, ref.utype)
        return _resolve(ref, binding) == name


def _resolve(ref: Ref, binding: dict | None) -> str:
    if binding and ref in binding:
        value = binding[ref]
        if not isinstance(value, str):
            raise ResolveError(f"parameter '{ref}' is bound to {value!r}, not an entity")
        return value
    return ref


def _resolve_duration(duration, binding: dict | None) -> int:
    if isinstance(duration, int):
        return duration
    if binding and duration in binding and isinstance(binding[duration], int):
        return binding[duration]
    raise ResolveError(f"duration '{duration}' is not bound to an integer")


# ----------------------------------------------------------------------
# transitionals


@dataclass(frozen=True)
class Transitional:
    name: str
    unlinks: tuple[LinkTemplate, ...]
    links: tuple[LinkTemplate, ...]


def _static_check_template(world: World, t: LinkTemplate, params: frozenset[str], label: str) -> None:
    """Validate a template whose refs are all concrete; param refs defer to
    bind time, unknown concrete refs are template errors."""
    world.kind(t.kind)
    refs = [r for r in (t.from_ref, t.to_ref) if r not in params]
    for r in refs:
        if r not in world.registry:
            raise InvalidTemplateError(f"{label}: unknown entity '{r}' in template '{t}'")
    if len(refs) < 2:
        return
    res = world.validate_link(t.from_ref, t.kind, t.to_ref)
    if not res:
        if res.tier == 2 and not world.tier2_strict:
            world.warnings.append(f"tier-2: {label}: {res.reason}")
            return
        raise InvalidTemplateError(f"{label}: invalid template '{t}': {res.reason}")


def define_transitional(world: World, name: str, unlinks, links) -> Transitional:
    """Register a named transitional; also registers it as a P entity under
    the Transitional universal."""
    unlinks, links = tuple(unlinks), tuple(links)
    if name in world.transitionals:
        raise DuplicateNameError(f"transitional '{name}' already defined")
    seen: set[tuple] = set()
    for t in unlinks + links:
        key = (t.from_ref, t.kind, t.to_ref)
        if key in seen:
            raise InvalidTemplateError(
                f"transitional '{name}': template '{t}' appears more than once"
            )
        seen.add(key)
        _static_check_template(world, t, frozenset(), f"transitional '{name}'")
    world.registry.instantiate_particular(name, "Transitional")
    tr = Transitional(name, unlinks, links)
    world.transitionals[name] = tr
    return tr


def apply_edits(
    world: World,
    unlinks: tuple[LinkTemplate, ...],
    links: tuple[LinkTemplate, ...],
    at: int,
    binding: dict | None = None,
    *,
    lenient: bool = False,
) -> list[TraceEvent]:
    """Apply an unlink/link batch atomically at one tick.

    Strict mode prechecks every edit and raises PreconditionFailedError
    (world unchanged) naming the implicit predicate that failed. Lenient
    mode skips unlinks with no active link and links already active.
    """
    un = [t.resolve(binding) for t in unlinks]
    ln = [t.resolve(binding) for t in links]
    if lenient:
        un = [t for t in un if world.active_link(*t) is not None]
        ln = [t for t in ln if world.active_link(*t) is None]
    else:
        for t in un:
            if world.active_link(*t) is None:
                raise PreconditionFailedError(
                    f"unlink target not active: {' '.join(t)}",
                    predicate=f"exists {t[0]} {t[1]} {t[2]}",
                )
        for t in ln:
            res = world.validate_link(*t)
            if not res and not (res.tier == 2 and not world.tier2_strict):
                raise PreconditionFailedError(
                    f"link target invalid: {' '.join(t)}: {res.reason}",
                    predicate=res.reason,
                )
            if world.active_link(*t) is not None:
                raise PreconditionFailedError(
                    f"link target already active: {' '.join(t)}",
                    predicate=f"not_exists {t[0]} {t[1]} {t[2]}",
                )
    before = len(world.trace)
    for t in un:
        world.unlink(*t, at)
    for t in ln:
        world.link(*t, at)
    return world.trace[before:]


def apply_transitional(world: World, t: Transitional, at: int, binding: dict | None = None) -> list[TraceEvent]:
    return apply_edits(world, t.unlinks, t.links, at, binding)


# ----------------------------------------------------------------------
# frames


@dataclass(frozen=True)
class Frame:
    name: str
    slots: tuple[str, ...]
    templates: tuple[LinkTemplate, ...]  # refs are slot names

    def used_slots(self) -> tuple[str, ...]:
        used = []
        for t in self.templates:
            for r in (t.from_ref, t.to_ref):
                if r not in used:
                    used.append(r)
        return tuple(used)


@dataclass
class FrameActivation:
    frame: str
    binding: dict[str, str]
    at: int
    created: list  # LinkInstance objects, template order
    active: bool = True

    def key(self) -> tuple:
        return (self.frame, tuple(sorted(self.binding.items())))


def _binding_payload(binding: dict[str, str]) -> dict[str, str]:
    return {k: binding[k] for k in sorted(binding)}


def define_frame(world: World, name: str, slots, templates) -> Frame:
    slots, templates = tuple(slots), tuple(templates)
    if name in world.frames:
        raise DuplicateNameError(f"frame '{name}' already defined")
    if len(set(slots)) != len(slots):
        raise DuplicateNameError(f"frame '{name}' declares a slot twice")
    for t in templates:
        world.kind(t.kind)
        for r in (t.from_ref, t.to_ref):
            if r not in slots:
                raise UnknownSlotError(
                    f"frame '{name}': template '{t}' references undeclared slot '{r}'"
                )
    f = Frame(name, slots, templates)
    world.frames[name] = f
    return f


def activate_frame(world: World, frame: Frame | str, binding: dict[str, str], at: int) -> FrameActivation:
    """Create every frame link at one tick, atomically."""
    f = world.frames.get(frame if isinstance(frame, str) else frame.name)
    if f is None:
        raise UnknownActionError(f"unknown frame '{frame}'")
    for slot in binding:
        if slot not in f.slots:
            raise UnknownSlotError(f"frame '{f.name}': binding names undeclared slot '{slot}'")
    missing = [s for s in f.used_slots() if s not in binding]
    if missing:
        raise IncompleteBindingError(
            f"frame '{f.name}': binding missing slot(s) {', '.join(missing)}"
        )
    act = FrameActivation(f.name, dict(binding), at, [])
    if act.key() in world.frame_activations:
        raise AlreadyActiveError(f"frame '{f.name}' already active for this binding")
    triples = [t.resolve(binding) for t in f.templates]
    seen = set()
    for t in triples:
        if t in seen:
            raise InvalidLinkError(
                f"frame '{f.name}': binding collapses two templates onto {' '.join(t)}"
            )
        seen.add(t)
        world.registry.lookup(t[0])
        world.registry.lookup(t[2])
    for t in triples:
        try:
            world.check_linkable(*t)
        except XfoError as exc:
            raise InvalidLinkError(f"frame '{f.name}': {exc}") from exc
    world.record("FrameActivate", at, {"frame": f.name, "binding": _binding_payload(binding)})
    for t in triples:
        act.created.append(world.link(*t, at))
    world.frame_activations[act.key()] = act
    return act


def deactivate_frame(world: World, activation: FrameActivation | tuple, at: int) -> list[TraceEvent]:
    """Unlink exactly the activation's links at one tick, atomically."""
    if isinstance(activation, FrameActivation):
        key = activation.key()
    else:
        frame, binding = activation
        key = (frame, tuple(sorted(binding.items())))
    act = world.frame_activations.get(key)
    if act is None:
        raise NotActiveError(f"frame '{key[0]}' is not active for this binding")
    gone = [l for l in act.created if l.end is not None]
    if gone:
        desc = ", ".join(" ".join(l.triple()) for l in gone)
        raise NotActiveError(
            f"frame '{act.frame}' activation is no longer atomic; missing link(s): {desc}"
        )
    before = len(world.trace)
    world.record("FrameDeactivate", at, {"frame": act.frame, "binding": _binding_payload(act.binding)})
    for l in act.created:
        world.unlink(*l.triple(), at)
    act.active = False
    del world.frame_activations[key]
    return world.trace[before:]


# ----------------------------------------------------------------------
# workflows


@dataclass(frozen=True)
class WorkflowStep:
    name: str
    agent_ref: Ref | None
    duration: int | str  # literal ticks or a parameter name
    preconditions: tuple[StatePredicate, ...] = ()
    unlinks: tuple[LinkTemplate, ...] = ()
    links: tuple[LinkTemplate, ...] = ()
    placeholder: bool = False


@dataclass(frozen=True)
class Step:
    step: WorkflowStep


@dataclass(frozen=True)
class Seq:
    items: tuple = ()


@dataclass(frozen=True)
class Loop:
    """Bounded loop: a finite count, a stop predicate, or the scenario
    horizon (until_end)."""

    body: Seq
    count: int | None = None
    guard: StatePredicate | None = None
    until_end: bool = False


@dataclass(frozen=True)
class Cond:
    guard: StatePredicate
    then_body: Seq
    else_body: Seq | None = None


Node = Union[Step, Seq, Loop, Cond]


@dataclass(frozen=True)
class Workflow:
    name: str
    params: tuple[str, ...]
    body: Seq
    requires_agent: bool  # True: Workflow (external factor); False: Mechanism


def walk_steps(node: Node):
    if isinstance(node, Step):
        yield node.step
    elif isinstance(node, Seq):
        for item in node.items:
            yield from walk_steps(item)
    elif isinstance(node, Loop):
        yield from walk_steps(node.body)
    elif isinstance(node, Cond):
        yield from walk_steps(node.then_body)
        if node.else_body is not None:
            yield from walk_steps(node.else_body)


def walk_guards(node: Node):
    """All predicates a body can evaluate: loop guards, cond guards, and
    step preconditions."""
    if isinstance(node, Step):
        yield from node.step.preconditions
    elif isinstance(node, Seq):
        for item in node.items:
            yield from walk_guards(item)
    elif isinstance(node, Loop):
        if node.guard is not None:
            yield node.guard
        yield from walk_guards(node.body)
    elif isinstance(node, Cond):
        yield node.guard
        yield from walk_guards(node.then_body)
        if node.else_body is not None:
            yield from walk_guards(node.else_body)


def _check_bounded(node: Node, name: str) -> None:
    if isinstance(node, Loop):
        if node.count is None and node.guard is None and not node.until_end:
            raise UnboundedLoopError(f"workflow '{name}' contains a loop with no count and no guard")
        _check_bounded(node.body, name)
    elif isinstance(node, Seq):
        for item in node.items:
            _check_bounded(item, name)
    elif isinstance(node, Cond):
        _check_bounded(node.then_body, name)
        if node.else_body is not None:
            _check_bounded(node.else_body, name)


def param_kinds(wf: Workflow) -> dict[str, str]:
    """Classify each parameter as 'entity' or 'count' from its uses."""
    kinds: dict[str, str] = {}

    def note(p: str, kind: str) -> None:
        if p in kinds and kinds[p] != kind:
            raise InvalidTemplateError(
                f"workflow '{wf.name}': parameter '{p}' used both as an entity and as a number"
            )
        kinds[p] = kind

    params = set(wf.params)
    for step in walk_steps(wf.body):
        if isinstance(step.duration, str) and step.duration in params:
            note(step.duration, "count")
        if step.agent_ref in params:
            note(step.agent_ref, "entity")
        for t in step.unlinks + step.links:
            for r in (t.from_ref, t.to_ref):
                if r in params:
                    note(r, "entity")
        for p in step.preconditions:
            for r in (p.from_ref, p.to_ref):
                if isinstance(r, str) and r in params:
                    note(r, "entity")
    return kinds


def define_workflow(world: World, name: str, body: Seq, requires_agent: bool, params=()) -> Workflow:
    if name in world.workflows:
        raise DuplicateNameError(f"workflow '{name}' already defined")
    _check_bounded(body, name)
    wf = Workflow(name, tuple(params), body, requires_agent)
    pset = frozenset(wf.params)
    seen_steps: set[str] = set()
    for step in walk_steps(body):
        if step.name in seen_steps:
            raise DuplicateNameError(f"workflow '{name}': step '{step.name}' defined twice")
        seen_steps.add(step.name)
        if requires_agent and step.agent_ref is None:
            raise MissingAgentError(
                f"workflow '{name}': step '{step.name}' has no agent but the workflow requires one"
            )
        if step.agent_ref is not None and step.agent_ref not in pset and step.agent_ref not in world.registry:
            raise UnknownEntityError(
                f"workflow '{name}': step '{step.name}' agent '{step.agent_ref}' is unknown"
            )
        if isinstance(step.duration, int) and step.duration < 0:
            raise InvalidTemplateError(f"workflow '{name}': step '{step.name}' has negative duration")
        seen_edits: set[tuple] = set()
        for t in step.unlinks + step.links:
            key = (t.from_ref, t.kind, t.to_ref)
            if key in seen_edits:
                raise InvalidTemplateError(
                    f"workflow '{name}': step '{step.name}' edits '{t}' more than once"
                )
            seen_edits.add(key)
            _static_check_template(world, t, pset, f"workflow '{name}' step '{step.name}'")
    for pred in walk_guards(body):
        _check_predicate(world, pred, f"workflow '{name}'", params=pset)
    param_kinds(wf)  # raises on contradictory parameter use
    world.workflows[name] = wf
    return wf


# ----------------------------------------------------------------------
# completeness checking


@dataclass(frozen=True)
class Gap:
    step: str
    predicate: str
    path: str


@dataclass(frozen=True)
class CompletenessReport:
    complete: bool
    gaps: tuple[Gap, ...]
    placeholders: tuple[str, ...]


Fact = tuple[str, str, str]


def _pred_matches_fact(pred: StatePredicate, fact: Fact) -> bool:
    if pred.kind != fact[1]:
        return False
    for ref, name in ((pred.from_ref, fact[0]), (pred.to_ref, fact[2])):
        if isinstance(ref, Wildcard):
            continue  # syntactic pass: wildcards match any token
        if ref != name:
            return False
    return True


def _pred_holds(pred: StatePredicate, facts: frozenset[Fact]) -> bool:
    found = any(_pred_matches_fact(pred, f) for f in facts)
    return found if pred.exists else not found


def check_completeness(workflow: Workflow, initial) -> CompletenessReport:
    """Symbolic forward pass over every feasible control path.

    Facts are link triples over ref tokens. Each step needs its explicit
    preconditions, plus the implicit ones of its strict edits, to hold in
    the running fact set; postconditions then edit the set. Conds fork the
    path; loops run one symbolic iteration plus a fixpoint re-check, and
    the facts flowing onward are the intersection over possible exits.
    Placeholder steps apply their assumed effects leniently and are listed
    in the report.
    """
    gaps: list[Gap] = []
    placeholders = tuple(s.name for s in walk_steps(workflow.body) if s.placeholder)

    init_facts = set()
    for p in initial:
        if p.exists and not isinstance(p.from_ref, Wildcard) and not isinstance(p.to_ref, Wildcard):
            init_facts.add((p.from_ref, p.kind, p.to_ref))

    def run_step(step: WorkflowStep, facts: frozenset[Fact], path: str) -> frozenset[Fact]:
        for pred in step.preconditions:
            if not _pred_holds(pred, facts):
                gaps.append(Gap(step.name, pred.render(), path))
        out = set(facts)
        if step.placeholder:
            for t in step.unlinks:
                out.discard((t.from_ref, t.kind, t.to_ref))
            for t in step.links:
                out.add((t.from_ref, t.kind, t.to_ref))
            return frozenset(out)
        for t in step.unlinks:
            fact = (t.from_ref, t.kind, t.to_ref)
            if fact not in out:
                gaps.append(Gap(step.name, f"exists {t}", path))
            out.discard(fact)
        for t in step.links:
            fact = (t.from_ref, t.kind, t.to_ref)
            if fact in out:
                gaps.append(Gap(step.name, f"not_exists {t}", path))
            out.add(fact)
        return frozenset(out)

    def run_node(node: Node, states: list[tuple[frozenset[Fact], str]]) -> list[tuple[frozenset[Fact], str]]:
        if isinstance(node, Step):
            return [(run_step(node.step, facts, path), path) for facts, path in states]
        if isinstance(node, Seq):
            for item in node.items:
                states = run_node(item, states)
            return states
        if isinstance(node, Cond):
            taken = run_node(node.then_body, [(f, p + "/then") for f, p in states])
            if node.else_body is not None:
                skipped = run_node(node.else_body, [(f, p + "/else") for f, p in states])
            else:
                skipped = states
            return taken + skipped
        if isinstance(node, Loop):
            out = []
            for facts, path in states:
                once = run_node(node.body, [(facts, path + "/iter1")])
                exits = [f for f, _ in once]
                may_repeat = node.until_end or node.guard is not None or (node.count or 0) > 1
                if may_repeat:
                    for f1, p1 in once:
                        again = run_node(node.body, [(f1, p1 + "/iter2")])
                        exits.extend(f for f, _ in again)
                if node.guard is not None or node.count == 0:
                    exits.append(facts)  # zero iterations possible
                merged = frozenset.intersection(*exits) if exits else facts
                out.append((merged, path))
            return out
        raise TypeError(f"unexpected node {node!r}")

    run_node(workflow.body, [(frozenset(init_facts), "")])
    return CompletenessReport(not gaps, tuple(gaps), placeholders)


# ----------------------------------------------------------------------
# rules


@dataclass(frozen=True)
class RuleAction:
    kind: str  # start_workflow | apply_transitional | activate_frame | deactivate_frame
    target: str
    args: tuple = ()  # start_workflow positional args
    binding: tuple = ()  # frame actions: sorted (slot, value) pairs

    def render(self) -> str:
        if self.kind == "start_workflow":
            return f"start_workflow {self.target}({', '.join(map(str, self.args))})"
        if self.kind == "apply_transitional":
            return f"apply_transitional {self.target}"
        inner = ", ".join(f"{k}={v}" for k, v in self.binding)
        return f"{self.kind} {self.target}({inner})"


@dataclass(frozen=True)
class Rule:
    """Edge-triggered condition-action pair: fires when the guard
    conjunction turns from false to true, at most once per tick."""

    name: str
    guard: tuple[StatePredicate, ...]
    action: RuleAction


def _check_predicate(world: World, p: StatePredicate, label: str, params: frozenset = frozenset()) -> None:
    world.kind(p.kind)
    for r in (p.from_ref, p.to_ref):
        if isinstance(r, Wildcard):
            ent = world.registry.get(r.utype)
            if ent is None or ent.layer is not Layer.U:
                raise UnknownEntityError(f"{label}: wildcard type '{r.utype}' is not a universal")
        elif r not in params and r not in world.registry:
            raise UnknownEntityError(f"{label}: unknown entity '{r}' in predicate '{p.render()}'")


def define_rule(world: World, name: str, guard, action: RuleAction) -> Rule:
    if name in world.rules:
        raise DuplicateNameError(f"rule '{name}' already defined")
    guard = tuple(guard)
    for p in guard:
        _check_predicate(world, p, f"rule '{name}'")
    if action.kind == "start_workflow":
        wf = world.workflows.get(action.target)
        if wf is None:
            raise UnknownActionError(f"rule '{name}': unknown workflow '{action.target}'")
        if len(action.args) != len(wf.params):
            raise UnknownActionError(
                f"rule '{name}': workflow '{action.target}' takes {len(wf.params)} "
                f"argument(s), got {len(action.args)}"
            )
    elif action.kind == "apply_transitional":
        if action.target not in world.transitionals:
            raise UnknownActionError(f"rule '{name}': unknown transitional '{action.target}'")
    elif action.kind in ("activate_frame", "deactivate_frame"):
        if action.target not in world.frames:
            raise UnknownActionError(f"rule '{name}': unknown frame '{action.target}'")
        for _, value in action.binding:
            if value not in world.registry:
                raise UnknownEntityError(f"rule '{name}': unknown entity '{value}' in binding")
    else:
        raise UnknownActionError(f"rule '{name}': unknown action kind '{action.kind}'")
    rule = Rule(name, guard, action)
    world.rules[name] = rule
    return rule
