"""Transitionals, frames, workflows, completeness, rules."""
from __future__ import annotations

import pytest

from xfo.dynamics import (
    Cond,
    LinkTemplate,
    Loop,
    RuleAction,
    Seq,
    StatePredicate,
    Step,
    Wildcard,
    WorkflowStep,
    activate_frame,
    apply_transitional,
    check_completeness,
    deactivate_frame,
    define_frame,
    define_rule,
    define_transitional,
    define_workflow,
)
from xfo.errors import (
    AlreadyActiveError,
    DuplicateNameError,
    IncompleteBindingError,
    InvalidLinkError,
    InvalidTemplateError,
    MissingAgentError,
    NotActiveError,
    PreconditionFailedError,
    UnboundedLoopError,
    UnknownActionError,
    UnknownEntityError,
    UnknownSlotError,
)
from xfo.ontology import Layer
from xfo.relations import World

from helpers import load_world

T = LinkTemplate
P = StatePredicate


@pytest.fixture
def lamp_world():
    w = World()
    reg = w.registry
    reg.define_universal("Lamp", "B_Object")
    reg.define_universal("Color", "B_Quality")
    for lamp in ("lampA_green", "lampA_yellow"):
        reg.instantiate_particular(lamp, "Lamp")
    for color in ("green", "yellow", "dark"):
        reg.instantiate_particular(color, "Color")
    w.declare_u_relation("Lamp", "Has_Quality", "Color")
    w.link("lampA_green", "Has_Quality", "green", 0)
    w.link("lampA_yellow", "Has_Quality", "dark", 0)
    return w


def _snapshot(world):
    return [(l.from_p, l.kind, l.to_p, l.start, l.end) for l in world.links]


def test_define_transitional(lamp_world):
    w = lamp_world
    t = define_transitional(
        w, "greenToYellow_A",
        unlinks=[T("lampA_green", "Has_Quality", "green"), T("lampA_yellow", "Has_Quality", "dark")],
        links=[T("lampA_green", "Has_Quality", "dark"), T("lampA_yellow", "Has_Quality", "yellow")],
    )
    assert t.name == "greenToYellow_A"
    # registered as a P entity under the Transitional universal
    e = w.registry.lookup("greenToYellow_A")
    assert e.layer is Layer.P and w.registry.b_ancestor("greenToYellow_A") == "X_Transitional"
    with pytest.raises(DuplicateNameError):
        define_transitional(w, "greenToYellow_A", [], [])


def test_define_transitional_template_errors(lamp_world):
    w = lamp_world
    with pytest.raises(InvalidTemplateError):
        # a quality cannot be the domain of Has_Quality (tier-1)
        define_transitional(w, "bad", [], [T("green", "Has_Quality", "lampA_green")])
    with pytest.raises(InvalidTemplateError):
        define_transitional(w, "bad2", [], [T("ghost", "Has_Quality", "green")])
    with pytest.raises(InvalidTemplateError):
        # duplicated template across the two lists
        define_transitional(
            w, "bad3",
            [T("lampA_green", "Has_Quality", "green")],
            [T("lampA_green", "Has_Quality", "green")],
        )


def test_apply_transitional(lamp_world):
    w = lamp_world
    t = define_transitional(
        w, "flip",
        unlinks=[T("lampA_green", "Has_Quality", "green"), T("lampA_yellow", "Has_Quality", "dark")],
        links=[T("lampA_green", "Has_Quality", "dark"), T("lampA_yellow", "Has_Quality", "yellow")],
    )
    events = apply_transitional(w, t, 2)
    assert [(e.kind, e.at) for e in events] == [
        ("Unlink", 2), ("Unlink", 2), ("Link", 2), ("Link", 2)
    ]
    got = [s.counterpart for s in w.state_of("lampA_green", 2).links]
    assert got == ["dark"]
    # second application fails: green is no longer linked
    before = _snapshot(w)
    with pytest.raises(PreconditionFailedError) as exc:
        apply_transitional(w, t, 3)
    assert exc.value.predicate == "exists lampA_green Has_Quality green"
    assert _snapshot(w) == before  # all-or-nothing


def test_apply_noop_transitional(lamp_world):
    w = lamp_world
    t = define_transitional(w, "noop", [], [])
    before = _snapshot(w)
    assert apply_transitional(w, t, 1) == []
    assert _snapshot(w) == before


def test_transitional_atomicity_on_link_conflict(lamp_world):
    w = lamp_world
    t = define_transitional(
        w, "t1",
        unlinks=[T("lampA_yellow", "Has_Quality", "dark")],
        links=[T("lampA_yellow", "Has_Quality", "green")],
    )
    w.link("lampA_yellow", "Has_Quality", "green", 1)  # occupy the link target
    before = _snapshot(w)
    with pytest.raises(PreconditionFailedError) as exc:
        apply_transitional(w, t, 2)  # link target already active
    assert exc.value.predicate == "not_exists lampA_yellow Has_Quality green"
    assert _snapshot(w) == before  # the unlink half must not have applied


@pytest.fixture
def school_world():
    return load_world("school.xfo")


EMPLOYMENT_BINDING = {
    "role": "teacher_role",
    "organization": "norfolk_schools",
    "person": "teacher1",
    "compensation": "teacher_salary",
    "duration": "one_year_term",
    "rights": "classroom_rights",
    "responsibilities": "teaching_duties",
}


def test_define_frame_errors(school_world):
    w = school_world
    with pytest.raises(DuplicateNameError):
        define_frame(w, "Employment", ("a",), ())
    with pytest.raises(UnknownSlotError):
        define_frame(w, "F2", ("a", "b"), (T("a", "Has_Quality", "salary"),))
    f = define_frame(w, "PureRecord", ("a", "b"), ())  # zero templates is fine
    assert f.templates == ()


def test_activate_frame_atomic(school_world):
    w = school_world
    act = activate_frame(w, "Employment", EMPLOYMENT_BINDING, 3)
    assert len(act.created) == 6
    assert all(l.start == 3 for l in act.created)  # one shared tick
    kinds = [e.kind for e in w.trace]
    assert kinds[0] == "FrameActivate" and kinds.count("Link") == 6
    with pytest.raises(AlreadyActiveError):
        activate_frame(w, "Employment", EMPLOYMENT_BINDING, 4)


def test_activate_frame_incomplete_binding(school_world):
    w = school_world
    binding = dict(EMPLOYMENT_BINDING)
    del binding["person"]
    with pytest.raises(IncompleteBindingError):
        activate_frame(w, "Employment", binding, 0)
    with pytest.raises(UnknownSlotError):
        activate_frame(w, "Employment", {**EMPLOYMENT_BINDING, "salary": "teacher_salary"}, 0)


def test_activate_frame_atomic_failure(school_world):
    w = school_world
    # pre-occupy one of the six links: activation must change nothing
    w.link("teacher1", "Has_Role", "teacher_role", 0)
    before = _snapshot(w)
    with pytest.raises(InvalidLinkError):
        activate_frame(w, "Employment", EMPLOYMENT_BINDING, 1)
    assert _snapshot(w) == before
    assert [e.kind for e in w.trace] == ["Link"]  # only the pre-existing link


def test_frame_roundtrip_exact_spans(school_world):
    w = school_world
    act = activate_frame(w, "Employment", EMPLOYMENT_BINDING, 1)
    deactivate_frame(w, act, 5)
    spans = {(l.from_p, l.kind, l.to_p, l.start, l.end) for l in w.links}
    assert all(s[3] == 1 and s[4] == 5 for s in spans)
    assert len(spans) == 6
    with pytest.raises(NotActiveError):
        deactivate_frame(w, act, 6)  # double deactivation


def test_deactivate_frame_after_manual_unlink(school_world):
    w = school_world
    act = activate_frame(w, "Employment", EMPLOYMENT_BINDING, 1)
    w.unlink("teacher1", "Has_Quality", "teacher_salary", 2)
    with pytest.raises(NotActiveError) as exc:
        deactivate_frame(w, act, 3)
    assert "teacher_salary" in str(exc.value)  # missing links are listed


def test_deactivate_by_binding(school_world):
    w = school_world
    activate_frame(w, "Employment", EMPLOYMENT_BINDING, 1)
    deactivate_frame(w, ("Employment", EMPLOYMENT_BINDING), 4)
    assert all(l.end == 4 for l in w.links)


def _step(name, duration=1, pre=(), unlinks=(), links=(), agent=None, placeholder=False):
    return Step(WorkflowStep(name, agent, duration, tuple(pre), tuple(unlinks), tuple(links), placeholder))


def test_define_workflow_errors(lamp_world):
    w = lamp_world
    with pytest.raises(UnboundedLoopError):
        define_workflow(w, "w1", Seq((Loop(Seq((_step("s"),))),)), False)
    with pytest.raises(MissingAgentError):
        define_workflow(w, "w2", Seq((_step("s"),)), True)  # agent required
    define_workflow(w, "ok", Seq((_step("s", agent="lampA_green"),)), True)
    with pytest.raises(DuplicateNameError):
        define_workflow(w, "ok", Seq(()), False)
    with pytest.raises(DuplicateNameError):
        define_workflow(w, "w3", Seq((_step("s"), _step("s"))), False)
    with pytest.raises(UnknownEntityError):
        define_workflow(w, "w4", Seq((_step("s", agent="ghost"),)), True)


def test_define_workflow_param_conflict(lamp_world):
    w = lamp_world
    step = _step("s", duration="x", links=(T("x", "Has_Quality", "green"),))
    with pytest.raises(InvalidTemplateError):
        define_workflow(w, "w", Seq((step,)), False, params=("x",))


def test_define_workflow_rejects_duplicate_step_edits(lamp_world):
    w = lamp_world
    dup = _step("s", links=(T("lampA_green", "Has_Quality", "yellow"),
                            T("lampA_green", "Has_Quality", "yellow")))
    with pytest.raises(InvalidTemplateError):
        define_workflow(w, "w", Seq((dup,)), False)
    both = _step("s2", unlinks=(T("lampA_green", "Has_Quality", "green"),),
                 links=(T("lampA_green", "Has_Quality", "green"),))
    with pytest.raises(InvalidTemplateError):
        define_workflow(w, "w2", Seq((both,)), False)


def test_define_workflow_checks_guard_refs(lamp_world):
    w = lamp_world
    bad_pre = _step("s", pre=(P(True, "ghost", "Has_Quality", "green"),))
    with pytest.raises(UnknownEntityError):
        define_workflow(w, "w", Seq((bad_pre,)), False)
    bad_loop = Loop(Seq((_step("s"),)), guard=P(True, "lampA_green", "Has_Quality", "ghost"))
    with pytest.raises(UnknownEntityError):
        define_workflow(w, "w2", Seq((bad_loop,)), False)
    # parameters are legal predicate refs
    ok = _step("s", pre=(P(True, "x", "Has_Quality", "green"),))
    define_workflow(w, "w3", Seq((ok,)), False, params=("x",))


def test_bounded_loop_forms(lamp_world):
    w = lamp_world
    guard = P(True, "lampA_green", "Has_Quality", "dark")
    define_workflow(w, "counted", Seq((Loop(Seq((_step("a"),)), count=3),)), False)
    define_workflow(w, "guarded", Seq((Loop(Seq((_step("b"),)), guard=guard),)), False)
    define_workflow(w, "horizon", Seq((Loop(Seq((_step("c"),)), until_end=True),)), False)


CELADON_FACT = P(True, "clay1", "Has_Quality", "raw")


def test_completeness_celadon():
    w = load_world("celadon.xfo")
    report = check_completeness(w.workflows["celadonProduction"], [CELADON_FACT])
    assert report.complete, report.gaps
    assert report.placeholders == ("dry_vessel",)


def test_completeness_missing_initial_fact():
    w = load_world("celadon.xfo")
    report = check_completeness(w.workflows["celadonProduction"], [])
    assert not report.complete
    assert report.gaps[0].step == "prepare_clay"
    assert report.gaps[0].predicate == "exists clay1 Has_Quality raw"


def test_completeness_empty_workflow(lamp_world):
    wf = define_workflow(lamp_world, "empty", Seq(()), False)
    report = check_completeness(wf, [])
    assert report.complete and report.placeholders == ()


def test_completeness_explores_both_branches(lamp_world):
    w = lamp_world
    guard = P(True, "lampA_green", "Has_Quality", "green")
    then_step = _step("on_green", unlinks=(T("lampA_green", "Has_Quality", "green"),))
    else_step = _step("on_other", unlinks=(T("lampA_green", "Has_Quality", "green"),))
    wf = define_workflow(
        w, "branchy", Seq((Cond(guard, Seq((then_step,)), Seq((else_step,))),)), False
    )
    report = check_completeness(wf, [])
    # both branches lack the fact; both paths are reported
    steps = {g.step for g in report.gaps}
    assert steps == {"on_green", "on_other"}
    paths = {g.path for g in report.gaps}
    assert paths == {"/then", "/else"}


def test_completeness_loop_fixpoint(lamp_world):
    w = lamp_world
    # swap green <-> dark and back: stable across iterations
    body = Seq((
        _step("to_dark",
              unlinks=(T("lampA_green", "Has_Quality", "green"),),
              links=(T("lampA_green", "Has_Quality", "dark"),)),
        _step("to_green",
              unlinks=(T("lampA_green", "Has_Quality", "dark"),),
              links=(T("lampA_green", "Has_Quality", "green"),)),
    ))
    wf = define_workflow(w, "cycle", Seq((Loop(body, until_end=True),)), False)
    report = check_completeness(wf, [P(True, "lampA_green", "Has_Quality", "green")])
    assert report.complete, report.gaps
    # a loop body that consumes its fact without restoring it gaps on iter2
    body2 = Seq((_step("eat", unlinks=(T("lampA_green", "Has_Quality", "green"),)),))
    wf2 = define_workflow(w, "eater", Seq((Loop(body2, count=2),)), False)
    report2 = check_completeness(wf2, [P(True, "lampA_green", "Has_Quality", "green")])
    assert not report2.complete
    assert report2.gaps[0].path.endswith("/iter2")


def test_completeness_placeholder_asserts(lamp_world):
    w = lamp_world
    ph = _step("assumed", links=(T("lampA_green", "Has_Quality", "yellow"),), placeholder=True)
    after = _step("uses", pre=(P(True, "lampA_green", "Has_Quality", "yellow"),))
    wf = define_workflow(w, "ph", Seq((ph, after)), False)
    report = check_completeness(wf, [])
    assert report.complete
    assert report.placeholders == ("assumed",)


def test_define_rule_validation(school_world):
    w = school_world
    guard = [P(False, Wildcard("Person"), "Has_Role", "teacher_role")]
    with pytest.raises(DuplicateNameError):
        define_rule(w, "teacher_vacancy", guard, RuleAction("apply_transitional", "x"))
    with pytest.raises(UnknownActionError):
        define_rule(w, "r1", guard, RuleAction("start_workflow", "ghost"))
    with pytest.raises(UnknownActionError):
        # arity mismatch against hireReplacement(recruiter)
        define_rule(w, "r2", guard, RuleAction("start_workflow", "hireReplacement", args=()))
    with pytest.raises(UnknownEntityError):
        define_rule(w, "r3", [P(True, "ghost", "Has_Role", "teacher_role")],
                    RuleAction("start_workflow", "hireReplacement", args=("superintendent1",)))
    with pytest.raises(UnknownEntityError):
        # wildcard type must be a universal
        define_rule(w, "r4", [P(False, Wildcard("B_Object"), "Has_Role", "teacher_role")],
                    RuleAction("start_workflow", "hireReplacement", args=("superintendent1",)))
    r = define_rule(w, "r5", guard,
                    RuleAction("start_workflow", "hireReplacement", args=("superintendent1",)))
    assert r.action.render() == "start_workflow hireReplacement(superintendent1)"


def test_predicate_wildcard_evaluation(school_world):
    w = school_world
    pred = P(True, Wildcard("Person"), "Has_Role", "teacher_role")
    assert not pred.holds(w, 0)
    w.link("teacher1", "Has_Role", "teacher_role", 0)
    assert pred.holds(w, 0)
    # a different role does not satisfy the concrete to-side
    assert not P(True, Wildcard("Person"), "Has_Role", "superintendent_role").holds(w, 0)
