"""Entity registry: the shipped B-layer taxonomy plus user-defined
Universals and Particulars, arranged in a single Is_A / Instance_Of tree.

Layering rules: B entities are shipped and fixed; U entities descend from
B or U entities; P entities instantiate exactly one U entity. Every parent
chain terminates at B_Entity.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import (
    BadParentError,
    DuplicateNameError,
    InvalidNameError,
    UnknownEntityError,
)

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# Entity ids are the (unique) entity names: stable and human readable.
EntityId = str


class Layer(str, Enum):
    B = "B"
    U = "U"
    P = "P"


@dataclass(frozen=True)
class EntityDef:
    name: str
    layer: Layer
    parent: EntityId | None
    doc: str | None = None


# The shipped upper taxonomy, in definition order. The X_ prefix marks
# kernel extensions; they behave as B-layer types everywhere.
B_TAXONOMY: tuple[tuple[str, str | None], ...] = (
    ("B_Entity", None),
    ("B_Continuant", "B_Entity"),
    ("B_IndependentContinuant", "B_Continuant"),
    ("B_MaterialEntity", "B_IndependentContinuant"),
    ("B_Object", "B_MaterialEntity"),
    ("B_ObjectAggregate", "B_MaterialEntity"),
    ("X_Substance", "B_MaterialEntity"),
    ("B_DependentContinuant", "B_Continuant"),
    ("B_Quality", "B_DependentContinuant"),
    ("B_RelationalQuality", "B_Quality"),
    ("B_Role", "B_DependentContinuant"),
    ("B_Occurrent", "B_Entity"),
    ("B_Process", "B_Occurrent"),
    ("X_Transitional", "B_Occurrent"),
)

B_ROOT = "B_Entity"


class Registry:
    """Name-keyed entity store.

    Single-writer while a model loads; treated as immutable afterwards, so
    reads are safe from any thread.
    """

    def __init__(self) -> None:
        self._defs: dict[str, EntityDef] = {}

    def __len__(self) -> int:
        return len(self._defs)

    def __contains__(self, name: str) -> bool:
        return name in self._defs

    def entities(self) -> list[EntityDef]:
        """All definitions in insertion order."""
        return list(self._defs.values())

    def get(self, name: str) -> EntityDef | None:
        return self._defs.get(name)

    def lookup(self, name: str) -> EntityDef:
        e = self._defs.get(name)
        if e is None:
            raise UnknownEntityError(f"unknown entity '{name}'")
        return e

    def _add(self, e: EntityDef) -> EntityId:
        if not NAME_RE.match(e.name):
            raise InvalidNameError(f"invalid entity name '{e.name}'")
        if e.name in self._defs:
            raise DuplicateNameError(f"entity name '{e.name}' already defined")
        self._defs[e.name] = e
        return e.name

    def define_universal(self, name: str, parent: EntityId, doc: str | None = None) -> EntityId:
        """Define a U entity under a B or U parent."""
        p = self._defs.get(parent)
        if p is None:
            raise BadParentError(f"unknown parent '{parent}' for universal '{name}'")
        if p.layer is Layer.P:
            raise BadParentError(
                f"universal '{name}' cannot descend from particular '{parent}'"
            )
        return self._add(EntityDef(name, Layer.U, parent, doc))

    def instantiate_particular(self, name: str, universal: EntityId, doc: str | None = None) -> EntityId:
        """Define a P entity as an instance of a U entity."""
        u = self._defs.get(universal)
        if u is None:
            raise BadParentError(f"unknown universal '{universal}' for particular '{name}'")
        if u.layer is not Layer.U:
            raise BadParentError(
                f"particular '{name}' must instantiate a universal, "
                f"not {u.layer.value}-layer '{universal}'"
            )
        return self._add(EntityDef(name, Layer.P, universal, doc))

    def is_descendant(self, a: EntityId, b: EntityId) -> bool:
        """True iff b is reachable from a by zero or more parent hops."""
        self.lookup(b)
        cur: EntityId | None = self.lookup(a).name
        while cur is not None:
            if cur == b:
                return True
            cur = self._defs[cur].parent
        return False

    def b_ancestor(self, e: EntityId) -> EntityId:
        """Nearest ancestor (or self) whose layer is B."""
        cur = self.lookup(e)
        while cur.layer is not Layer.B:
            # parent always exists below the B layer
            cur = self._defs[cur.parent]  # type: ignore[index]
        return cur.name

    def parent_chain(self, e: EntityId) -> list[EntityId]:
        """Names from e up to and including B_Entity."""
        chain = [self.lookup(e).name]
        while (p := self._defs[chain[-1]].parent) is not None:
            chain.append(p)
        return chain


def bootstrap_b_taxonomy() -> Registry:
    """Fresh registry holding exactly the shipped B taxonomy."""
    reg = Registry()
    for name, parent in B_TAXONOMY:
        reg._add(EntityDef(name, Layer.B, parent))
    return reg
