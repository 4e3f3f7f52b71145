"""Load parsed documents into kernel structures, collecting diagnostics.

Loading is single-pass and top-to-bottom; forward references are errors.
A failed statement is skipped and loading continues so authors see every
problem at once.
"""
from __future__ import annotations

from pathlib import Path

from . import dsl
from .dsl import (
    ActivateStmt,
    ApplyStmt,
    DeactivateStmt,
    Diagnostic,
    FrameStmt,
    HorizonStmt,
    InitStmt,
    InterruptStmt,
    ModelDocument,
    ModelHeader,
    ParticularStmt,
    RelateStmt,
    RelationStmt,
    RuleRefStmt,
    RuleStmt,
    RunStmt,
    ScenarioDocument,
    ScenarioHeader,
    SourceSpan,
    TransitionalStmt,
    UniversalStmt,
    WorkflowStmt,
)
from .dynamics import (
    define_frame,
    define_rule,
    define_transitional,
    define_workflow,
)
from .errors import XfoError
from .microworld import (
    ActivateDirective,
    ApplyDirective,
    DeactivateDirective,
    InterruptDirective,
    RunSpec,
    Scenario,
    _build_binding,
)
from .relations import World


def _diag(diags: list, code: str, message: str, span: SourceSpan | None) -> None:
    diags.append(Diagnostic("error", code, message, span or SourceSpan("<unknown>", 1, 1)))


def _drain_warnings(world: World, diags: list, span: SourceSpan | None) -> None:
    for msg in world.warnings:
        diags.append(Diagnostic(
            "warning", "W_TIER2_UNCOVERED", msg,
            span or SourceSpan("<unknown>", 1, 1),
        ))
    world.warnings.clear()


def build_world(doc: ModelDocument, *, tier2_strict: bool = True) -> tuple[World, list[Diagnostic]]:
    """Load a model document into a fresh World."""
    world = World(tier2_strict=tier2_strict)
    diags: list[Diagnostic] = []
    for stmt in doc.statements:
        try:
            _load_stmt(world, stmt, diags)
        except XfoError as exc:
            _diag(diags, exc.code, str(exc), stmt.span)
        _drain_warnings(world, diags, stmt.span)
    return world, diags


def _load_stmt(world: World, stmt, diags: list) -> None:
    if isinstance(stmt, ModelHeader):
        world.model_name = stmt.name
    elif isinstance(stmt, UniversalStmt):
        if stmt.parent not in world.registry:
            _diag(diags, "E_UNKNOWN_PARENT", f"unknown parent '{stmt.parent}'", stmt.span)
            return
        world.registry.define_universal(stmt.name, stmt.parent)
    elif isinstance(stmt, ParticularStmt):
        if stmt.universal not in world.registry:
            _diag(diags, "E_UNKNOWN_PARENT", f"unknown universal '{stmt.universal}'", stmt.span)
            return
        world.registry.instantiate_particular(stmt.name, stmt.universal)
    elif isinstance(stmt, RelationStmt):
        world.declare_relation_kind(stmt.name, stmt.domain, stmt.range_)
    elif isinstance(stmt, RelateStmt):
        world.declare_u_relation(stmt.from_u, stmt.kind, stmt.to_u)
    elif isinstance(stmt, TransitionalStmt):
        define_transitional(world, stmt.name, stmt.unlinks, stmt.links)
    elif isinstance(stmt, FrameStmt):
        define_frame(world, stmt.name, stmt.slots, stmt.templates)
    elif isinstance(stmt, WorkflowStmt):
        define_workflow(world, stmt.name, stmt.body, stmt.requires_agent, stmt.params)
    elif isinstance(stmt, RuleStmt):
        define_rule(world, stmt.name, stmt.when, stmt.then)


def build_scenario(doc: ScenarioDocument, world: World) -> tuple[Scenario | None, list[Diagnostic]]:
    """Resolve a scenario document against a loaded world."""
    diags: list[Diagnostic] = []
    name = doc.name
    horizon: int | None = None
    init: list = []
    schedule: list = []
    rules: list[str] = []
    n_runs = 0
    for stmt in doc.statements:
        if isinstance(stmt, ScenarioHeader):
            continue
        if isinstance(stmt, HorizonStmt):
            if horizon is not None:
                _diag(diags, "E_PARSE", "horizon given more than once", stmt.span)
            elif stmt.value <= 0:
                _diag(diags, "E_NO_HORIZON", "horizon must be a positive tick", stmt.span)
            else:
                horizon = stmt.value
        elif isinstance(stmt, InitStmt):
            t = stmt.template
            try:
                res = world.validate_link(t.from_ref, t.kind, t.to_ref)
            except XfoError as exc:
                _diag(diags, "E_INVALID_INIT_LINK", f"initial link '{t}': {exc}", stmt.span)
                continue
            if not res and not (res.tier == 2 and not world.tier2_strict):
                _diag(diags, "E_INVALID_INIT_LINK", f"initial link '{t}': {res.reason}", stmt.span)
                continue
            init.append(t)
        elif isinstance(stmt, RunStmt):
            wf = world.workflows.get(stmt.workflow)
            if wf is None:
                _diag(diags, "E_RESOLVE", f"unknown workflow '{stmt.workflow}'", stmt.span)
                continue
            try:
                _build_binding(world, wf, stmt.args, "run")
            except XfoError as exc:
                _diag(diags, "E_RESOLVE", str(exc), stmt.span)
                continue
            schedule.append(RunSpec(stmt.workflow, stmt.args, stmt.at))
            n_runs += 1
        elif isinstance(stmt, RuleRefStmt):
            if stmt.name not in world.rules:
                _diag(diags, "E_RESOLVE", f"unknown rule '{stmt.name}'", stmt.span)
                continue
            rules.append(stmt.name)
        elif isinstance(stmt, ActivateStmt):
            if stmt.frame not in world.frames:
                _diag(diags, "E_RESOLVE", f"unknown frame '{stmt.frame}'", stmt.span)
                continue
            schedule.append(ActivateDirective(stmt.frame, tuple(sorted(stmt.binding)), stmt.at))
        elif isinstance(stmt, DeactivateStmt):
            if stmt.frame not in world.frames:
                _diag(diags, "E_RESOLVE", f"unknown frame '{stmt.frame}'", stmt.span)
                continue
            schedule.append(DeactivateDirective(stmt.frame, tuple(sorted(stmt.binding)), stmt.at))
        elif isinstance(stmt, ApplyStmt):
            if stmt.transitional not in world.transitionals:
                _diag(diags, "E_RESOLVE", f"unknown transitional '{stmt.transitional}'", stmt.span)
                continue
            schedule.append(ApplyDirective(stmt.transitional, stmt.at))
        elif isinstance(stmt, InterruptStmt):
            schedule.append(InterruptDirective(stmt.run, stmt.at))
    if horizon is None:
        _diag(diags, "E_NO_HORIZON", "scenario has no horizon", _first_span(doc))
        return None, diags
    for item in schedule:
        if item.at > horizon:
            _diag(diags, "E_RESOLVE", f"tick {item.at} is past the horizon {horizon}", _first_span(doc))
    for item in schedule:
        if isinstance(item, InterruptDirective) and not 0 <= item.run < n_runs:
            _diag(diags, "E_RESOLVE", f"no run with ordinal {item.run}", _first_span(doc))
    if any(d.severity == "error" for d in diags):
        return None, diags
    return Scenario(name, horizon, tuple(init), tuple(schedule), tuple(rules)), diags


def _first_span(doc) -> SourceSpan:
    for s in doc.statements:
        if s.span is not None:
            return s.span
    return SourceSpan("<scenario>", 1, 1)


def load_model_path(path: str | Path, *, tier2_strict: bool = True):
    """Parse and load a model file: (world | None, diagnostics)."""
    path = Path(path)
    result = dsl.parse_model(path.read_text(encoding="utf-8"), file=path.name)
    diags = list(result.diagnostics)
    if not result.ok:
        return None, diags
    world, load_diags = build_world(result.document, tier2_strict=tier2_strict)
    diags.extend(load_diags)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return world, diags


def load_scenario_path(path: str | Path, world: World):
    """Parse and resolve a scenario file: (scenario | None, diagnostics)."""
    path = Path(path)
    result = dsl.parse_scenario(path.read_text(encoding="utf-8"), file=path.name)
    diags = list(result.diagnostics)
    if not result.ok:
        return None, diags
    scenario, sc_diags = build_scenario(result.document, world)
    diags.extend(sc_diags)
    return scenario, diags
