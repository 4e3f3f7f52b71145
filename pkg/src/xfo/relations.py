"""Relation kinds, U-level declarations, P-level links and the two-tier
validation scheme.

Tier 1 checks B-level signatures: a declaration (fromU, kind, toU) is
admissible when the B ancestors of both sides descend from the kind's
domain and range bounds. Tier 2 checks declaration cover: a particular
link is admissible only when some stored declaration spans both
participants' universals. Tier 1 alone would accept links the model never
sanctioned, which is exactly what tier 2 exists to reject.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    BadBoundError,
    DuplicateActiveLinkError,
    DuplicateNameError,
    InvalidLinkError,
    InvalidNameError,
    NoActiveLinkError,
    NotIndependentContinuantError,
    SignatureMismatchError,
    Tier2UncoveredError,
    UnknownKindError,
    XfoError,
)
from .ontology import NAME_RE, EntityId, Layer, Registry, bootstrap_b_taxonomy
from .trace import TraceEvent


@dataclass(frozen=True)
class RelationKind:
    name: str
    domain_b: EntityId
    range_b: EntityId
    builtin: bool = False


BUILTIN_KINDS: tuple[RelationKind, ...] = (
    RelationKind("Participates_In", "B_IndependentContinuant", "B_Occurrent", builtin=True),
    RelationKind("Continuant_Part_Of", "B_Continuant", "B_Continuant", builtin=True),
    RelationKind("Has_Quality", "B_IndependentContinuant", "B_Quality", builtin=True),
    RelationKind("Has_Role", "B_IndependentContinuant", "B_Role", builtin=True),
)


@dataclass(frozen=True)
class RelationDeclaration:
    from_u: EntityId
    kind: str
    to_u: EntityId


@dataclass
class LinkInstance:
    """One time-spanned edge. Spans are half-open: [start, end)."""

    from_p: EntityId
    kind: str
    to_p: EntityId
    start: int
    end: int | None = None

    def triple(self) -> tuple[str, str, str]:
        return (self.from_p, self.kind, self.to_p)

    def active_at(self, at: int) -> bool:
        return self.start <= at and (self.end is None or self.end > at)


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    tier: int = 0  # failing tier when invalid (1 or 2)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


VALID = ValidationResult(True)


@dataclass(frozen=True)
class StateLink:
    direction: str  # "out" | "in"
    kind: str
    counterpart: EntityId


@dataclass(frozen=True)
class State:
    """Links active on one entity at one tick, deterministically ordered."""

    entity: EntityId
    at: int
    links: tuple[StateLink, ...]


@dataclass(frozen=True)
class TicEntry:
    direction: str
    kind: str
    counterpart: EntityId
    via: EntityId | None = None  # the U entity the declaration was made on


@dataclass(frozen=True)
class TIC:
    """An Independent Continuant bundled with its relationships."""

    core: EntityId
    at: int | None
    entries: tuple[TicEntry, ...]


class World:
    """Registry plus relation kinds, declarations and the link history.

    Mutated only by a single loader/scheduler thread; quiescent worlds are
    safe for concurrent readers. ``tier2_strict=False`` downgrades tier-2
    link failures to entries in ``warnings``.
    """

    def __init__(self, registry: Registry | None = None, *, tier2_strict: bool = True) -> None:
        self.registry = registry if registry is not None else bootstrap_b_taxonomy()
        self.tier2_strict = tier2_strict
        self.kinds: dict[str, RelationKind] = {k.name: k for k in BUILTIN_KINDS}
        self.declarations: list[RelationDeclaration] = []
        self.links: list[LinkInstance] = []
        self.trace: list[TraceEvent] = []
        self.warnings: list[str] = []
        self.model_name = "model"
        # definition tables filled by the dynamics layer
        self.transitionals: dict[str, object] = {}
        self.frames: dict[str, object] = {}
        self.workflows: dict[str, object] = {}
        self.rules: dict[str, object] = {}
        self.frame_activations: dict[tuple, object] = {}
        self._seq = 0
        # Named transitionals register as P instances of this universal.
        self.registry.define_universal("Transitional", "X_Transitional")

    # ------------------------------------------------------------------
    # trace plumbing

    def record(self, kind: str, at: int, payload: dict) -> TraceEvent:
        ev = TraceEvent(self._seq, at, kind, payload)
        self._seq += 1
        self.trace.append(ev)
        return ev

    # ------------------------------------------------------------------
    # kinds and declarations

    def kind(self, name: str) -> RelationKind:
        k = self.kinds.get(name)
        if k is None:
            raise UnknownKindError(f"unknown relation kind '{name}'")
        return k

    def declare_relation_kind(self, name: str, domain_b: EntityId, range_b: EntityId) -> RelationKind:
        """Register an ad hoc kind; reifies it as a U entity under
        B_RelationalQuality (built-ins are not reified)."""
        if not NAME_RE.match(name):
            raise InvalidNameError(f"invalid relation kind name '{name}'")
        if name in self.kinds:
            raise DuplicateNameError(f"relation kind '{name}' already defined")
        for bound, side in ((domain_b, "domain"), (range_b, "range")):
            e = self.registry.get(bound)
            if e is None:
                raise BadBoundError(f"unknown {side} bound '{bound}' for kind '{name}'")
            if e.layer is not Layer.B:
                raise BadBoundError(
                    f"{side} bound '{bound}' of kind '{name}' is {e.layer.value}-layer; bounds must be B-layer"
                )
        self.registry.define_universal(name, "B_RelationalQuality")
        k = RelationKind(name, domain_b, range_b)
        self.kinds[name] = k
        return k

    def _tier1(self, kind: RelationKind, from_e: EntityId, to_e: EntityId) -> ValidationResult:
        reg = self.registry
        from_b = reg.b_ancestor(from_e)
        to_b = reg.b_ancestor(to_e)
        if not reg.is_descendant(from_b, kind.domain_b):
            return ValidationResult(
                False, 1,
                f"domain: B ancestor of '{from_e}' is '{from_b}', "
                f"which does not descend from '{kind.domain_b}'",
            )
        if not reg.is_descendant(to_b, kind.range_b):
            return ValidationResult(
                False, 1,
                f"range: B ancestor of '{to_e}' is '{to_b}', "
                f"which does not descend from '{kind.range_b}'",
            )
        return VALID

    def declare_u_relation(self, from_u: EntityId, kind: str, to_u: EntityId) -> RelationDeclaration:
        """Store a U-level relation declaration after the tier-1 check."""
        k = self.kind(kind)
        for name in (from_u, to_u):
            if self.registry.lookup(name).layer is not Layer.U:
                raise SignatureMismatchError(
                    f"declaration participant '{name}' is not a U-layer entity"
                )
        res = self._tier1(k, from_u, to_u)
        if not res:
            raise SignatureMismatchError(f"'{from_u}' {kind} '{to_u}': {res.reason}")
        decl = RelationDeclaration(from_u, kind, to_u)
        if decl not in self.declarations:
            self.declarations.append(decl)
        return decl

    # ------------------------------------------------------------------
    # particular-level links

    def validate_link(self, from_p: EntityId, kind: str, to_p: EntityId) -> ValidationResult:
        """Two-tier check for a particular-level link; never raises for an
        Invalid verdict, only for unknown ids or kinds."""
        k = self.kind(kind)
        reg = self.registry
        for name in (from_p, to_p):
            if reg.lookup(name).layer is not Layer.P:
                return ValidationResult(
                    False, 1, f"'{name}' is not a P-layer entity; links relate particulars"
                )
        res = self._tier1(k, from_p, to_p)
        if not res:
            return res
        for d in self.declarations:
            if d.kind == kind and reg.is_descendant(from_p, d.from_u) and reg.is_descendant(to_p, d.to_u):
                return VALID
        return ValidationResult(
            False, 2,
            f"no declaration covers '{from_p}' {kind} '{to_p}' "
            f"(universals '{reg.lookup(from_p).parent}' / '{reg.lookup(to_p).parent}')",
        )

    def active_link(self, from_p: EntityId, kind: str, to_p: EntityId) -> LinkInstance | None:
        for l in reversed(self.links):
            if l.end is None and l.triple() == (from_p, kind, to_p):
                return l
        return None

    def check_linkable(self, from_p: EntityId, kind: str, to_p: EntityId) -> None:
        """Raise unless a new (from, kind, to) link may start now."""
        res = self.validate_link(from_p, kind, to_p)
        if not res:
            if res.tier == 2 and not self.tier2_strict:
                self.warnings.append(f"tier-2: {res.reason}")
            elif res.tier == 2:
                raise Tier2UncoveredError(f"invalid link: {res.reason}", result=res)
            else:
                raise InvalidLinkError(f"invalid link: {res.reason}", result=res)
        if self.active_link(from_p, kind, to_p) is not None:
            raise DuplicateActiveLinkError(
                f"link '{from_p}' {kind} '{to_p}' is already active"
            )

    def link(self, from_p: EntityId, kind: str, to_p: EntityId, at: int) -> LinkInstance:
        self.check_linkable(from_p, kind, to_p)
        inst = LinkInstance(from_p, kind, to_p, at)
        self.links.append(inst)
        self.record("Link", at, {"from": from_p, "relation": kind, "to": to_p})
        return inst

    def unlink(self, from_p: EntityId, kind: str, to_p: EntityId, at: int) -> LinkInstance:
        inst = self.active_link(from_p, kind, to_p)
        if inst is None or inst.start > at:
            raise NoActiveLinkError(
                f"no active link '{from_p}' {kind} '{to_p}' at tick {at}"
            )
        inst.end = at
        self.record("Unlink", at, {"from": from_p, "relation": kind, "to": to_p})
        return inst

    # ------------------------------------------------------------------
    # state and TICs

    def state_of(self, e: EntityId, at: int) -> State:
        self.registry.lookup(e)
        found = []
        for l in self.links:
            if not l.active_at(at):
                continue
            if l.from_p == e:
                found.append(StateLink("out", l.kind, l.to_p))
            if l.to_p == e:
                found.append(StateLink("in", l.kind, l.from_p))
        found.sort(key=lambda s: (s.kind, s.counterpart, s.direction))
        return State(e, at, tuple(found))

    def tic_of(self, e: EntityId, at: int | None = None) -> TIC:
        """U view: own plus inherited declarations. P view: active links
        (requires ``at``)."""
        ent = self.registry.lookup(e)
        b = self.registry.b_ancestor(e)
        if not self.registry.is_descendant(b, "B_IndependentContinuant"):
            raise NotIndependentContinuantError(
                f"'{e}' is not an Independent Continuant (B ancestor {b})"
            )
        if ent.layer is Layer.P:
            if at is None:
                raise XfoError(f"tic_of('{e}'): a tick is required for particulars")
            st = self.state_of(e, at)
            entries = tuple(TicEntry(s.direction, s.kind, s.counterpart) for s in st.links)
            return TIC(e, at, entries)
        lineage = set(self.registry.parent_chain(e))
        entries = []
        for d in self.declarations:
            if d.from_u in lineage:
                entries.append(TicEntry("out", d.kind, d.to_u, via=d.from_u))
            if d.to_u in lineage:
                entries.append(TicEntry("in", d.kind, d.from_u, via=d.to_u))
        entries.sort(key=lambda t: (t.kind, t.counterpart, t.direction))
        return TIC(e, None, tuple(entries))
