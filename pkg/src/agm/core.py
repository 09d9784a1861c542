"""Workitems, orderings, guarded statements, and the machine instance record.

A workitem is a plain tuple ``(vertex, attr0, attr1, ...)`` indexed by its
vertex; the bracket operator is literally tuple indexing (``w[0]`` is the
vertex, ``w[1]`` the first attribute). A strict weak ordering over workitems
partitions them into equivalence classes; the engine drains classes in the
induced order. A processing function is an ordered list of guarded
statements; evaluating one workitem fires at most the first statement whose
condition holds.
"""

from __future__ import annotations

import enum
import math
import numbers
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import ParameterError, SchemaError
from .graph import Graph

__all__ = [
    "WorkItem",
    "WorkItemSchema",
    "Ordering",
    "OrderingDescriptor",
    "make_ordering",
    "compare",
    "check_swo_axioms",
    "SwoReport",
    "Statement",
    "ProcessingFunction",
    "evaluate_pf",
    "would_fire",
    "StateMap",
    "AgmInstance",
]

# (vertex, attr...) — attrs are ints or floats per the owning schema.
WorkItem = tuple

INT_KIND = "int"
REAL_KIND = "real"


@dataclass(frozen=True)
class WorkItemSchema:
    """Shape contract for one instance's workitems.

    ``names[i]``/``kinds[i]`` describe attribute ``w[i + 1]``; kinds are
    ``"int"`` or ``"real"``.
    """

    names: tuple[str, ...]
    kinds: tuple[str, ...]

    def __post_init__(self):
        if len(self.names) != len(self.kinds):
            raise ParameterError("names and kinds must have equal length")
        if not self.names:
            raise ParameterError("schema needs at least one attribute")
        for k in self.kinds:
            if k not in (INT_KIND, REAL_KIND):
                raise ParameterError(f"unknown attribute kind {k!r}")

    @property
    def arity(self) -> int:
        return len(self.names)

    def check(self, w: WorkItem, n: int | None = None) -> None:
        """Raise :class:`SchemaError` unless ``w`` conforms."""
        if not isinstance(w, tuple) or len(w) != self.arity + 1:
            raise SchemaError(f"workitem {w!r} does not have arity {self.arity}")
        v = w[0]
        if isinstance(v, bool) or not isinstance(v, numbers.Integral):
            raise SchemaError(f"workitem vertex {v!r} is not an integer")
        if v < 0 or (n is not None and v >= n):
            raise SchemaError(f"workitem vertex {v} out of range")
        for value, kind, name in zip(w[1:], self.kinds, self.names):
            if isinstance(value, bool):
                raise SchemaError(f"attribute {name!r} is boolean")
            if kind == INT_KIND and not isinstance(value, numbers.Integral):
                raise SchemaError(f"attribute {name!r}={value!r} is not an integer")
            if kind == REAL_KIND and not isinstance(value, numbers.Real):
                raise SchemaError(f"attribute {name!r}={value!r} is not a real")


class Ordering(enum.Enum):
    """Three-way comparison outcome. EQUIVALENT is non-comparability."""

    LESS = -1
    EQUIVALENT = 0
    GREATER = 1


@dataclass(frozen=True)
class OrderingDescriptor:
    """A strict weak ordering, optionally backed by a class-key function.

    ``compare_fn(a, b)`` is the three-way relation. When ``class_key`` is
    present, ``compare`` must agree with it: a precedes b exactly when
    ``class_key(a)`` precedes ``class_key(b)`` in the key direction
    (ascending unless ``key_descending``). All built-in orderings carry keys,
    which lets the engine bucket items in O(1) per item.
    """

    name: str
    compare_fn: Callable[[WorkItem, WorkItem], Ordering]
    class_key: Callable[[WorkItem], float] | None = None
    key_descending: bool = False

    def compare(self, a: WorkItem, b: WorkItem) -> Ordering:
        return self.compare_fn(a, b)


def compare(o: OrderingDescriptor, a: WorkItem, b: WorkItem) -> Ordering:
    """Three-way comparison of two workitems under ``o``."""
    return o.compare_fn(a, b)


def _keyed(name: str, key: Callable[[WorkItem], float],
           descending: bool = False) -> OrderingDescriptor:
    if descending:
        def cmp(a, b, _k=key):
            ka, kb = _k(a), _k(b)
            if ka > kb:
                return Ordering.LESS
            if kb > ka:
                return Ordering.GREATER
            return Ordering.EQUIVALENT
    else:
        def cmp(a, b, _k=key):
            ka, kb = _k(a), _k(b)
            if ka < kb:
                return Ordering.LESS
            if kb < ka:
                return Ordering.GREATER
            return Ordering.EQUIVALENT
    return OrderingDescriptor(name=name, compare_fn=cmp, class_key=key,
                              key_descending=descending)


def make_ordering(kind: str, *, delta: int | None = None,
                  k: int | None = None) -> OrderingDescriptor:
    """Build one of the seven built-in orderings.

    kinds: ``dijkstra`` (w[1] ascending), ``delta`` (floor(w[1]/delta)
    ascending), ``level`` (w[1] ascending), ``kla`` (floor(w[1]/k)
    ascending), ``residual`` (w[1] descending), ``component`` (w[1]
    ascending), ``chaotic`` (everything equivalent).
    """
    if kind == "dijkstra":
        return _keyed("dijkstra", lambda w: w[1])
    if kind == "delta":
        if delta is None or delta != int(delta) or delta < 1:
            raise ParameterError(f"delta must be an integer >= 1, got {delta}")
        d = int(delta)
        return _keyed(f"delta({d})", lambda w: w[1] // d if isinstance(w[1], int)
                      else math.floor(w[1] / d))
    if kind == "level":
        return _keyed("level", lambda w: w[1])
    if kind == "kla":
        if k is None or k != int(k) or k < 1:
            raise ParameterError(f"k must be an integer >= 1, got {k}")
        kk = int(k)
        return _keyed(f"kla({kk})", lambda w: w[1] // kk if isinstance(w[1], int)
                      else math.floor(w[1] / kk))
    if kind == "residual":
        return _keyed("residual", lambda w: w[1], descending=True)
    if kind == "component":
        return _keyed("component", lambda w: w[1])
    if kind == "chaotic":
        return _keyed("chaotic", lambda w: 0)
    raise ParameterError(f"unknown ordering kind {kind!r}")


@dataclass
class SwoReport:
    """Violation counts for the four strict-weak-ordering axioms."""

    irreflexivity: int = 0
    asymmetry: int = 0
    less_transitivity: int = 0
    equivalent_transitivity: int = 0
    pairs_checked: int = 0
    triples_checked: int = 0

    @property
    def total_violations(self) -> int:
        return (self.irreflexivity + self.asymmetry
                + self.less_transitivity + self.equivalent_transitivity)

    @property
    def ok(self) -> bool:
        return self.total_violations == 0


def check_swo_axioms(o: OrderingDescriptor, sample: Sequence[WorkItem],
                     max_pairs: int = 200_000, max_triples: int = 200_000,
                     seed: int = 0) -> SwoReport:
    """Count axiom violations of ``o`` over a sample of workitems.

    Checks irreflexivity on every item, and asymmetry / transitivity of the
    comparable relation / transitivity of the non-comparable relation on all
    pairs and triples when the sample is small, otherwise on a seeded random
    subset of the stated sizes.
    """
    if not sample:
        raise ParameterError("sample must be nonempty")
    cmp = o.compare_fn
    rep = SwoReport()
    n = len(sample)
    for w in sample:
        if cmp(w, w) is not Ordering.EQUIVALENT:
            rep.irreflexivity += 1
    rng = random.Random(seed)
    if n * (n - 1) <= max_pairs:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        pairs = [(rng.randrange(n), rng.randrange(n)) for _ in range(max_pairs)]
    for i, j in pairs:
        if i == j:
            continue
        rep.pairs_checked += 1
        ab = cmp(sample[i], sample[j])
        ba = cmp(sample[j], sample[i])
        if ab is Ordering.LESS and ba is Ordering.LESS:
            rep.asymmetry += 1
    if n * (n - 1) * (n - 2) <= max_triples:
        triples = [(i, j, l) for i in range(n) for j in range(n)
                   for l in range(n) if i != j and j != l and i != l]
    else:
        triples = []
        while len(triples) < max_triples:
            i, j, l = (rng.randrange(n) for _ in range(3))
            triples.append((i, j, l))
    for i, j, l in triples:
        rep.triples_checked += 1
        a, b, c = sample[i], sample[j], sample[l]
        ab, bc = cmp(a, b), cmp(b, c)
        if ab is Ordering.LESS and bc is Ordering.LESS:
            if cmp(a, c) is not Ordering.LESS:
                rep.less_transitivity += 1
        if ab is Ordering.EQUIVALENT and bc is Ordering.EQUIVALENT:
            if cmp(a, c) is not Ordering.EQUIVALENT:
                rep.equivalent_transitivity += 1
    return rep


@dataclass(frozen=True)
class Statement:
    """One guarded statement: ⟨condition, constructor, state update⟩.

    All three callables receive ``(workitem, states, graph)`` where ``states``
    maps state names to their vertex-indexed value lists. When the statement
    fires, the constructor runs before the state update, so both observe the
    pre-update state; constructors that depend on the update's intermediate
    values (e.g. a rank increment) recompute them.
    """

    condition: Callable[[WorkItem, Mapping[str, list], Graph], bool]
    constructor: Callable[[WorkItem, Mapping[str, list], Graph], list[WorkItem]]
    state_update: Callable[[WorkItem, Mapping[str, list], Graph], None]


@dataclass(frozen=True)
class ProcessingFunction:
    """Ordered statements; the first whose condition holds fires.

    ``stable_conditions`` declares that once every condition is false for a
    given workitem, no future state change can make one true again (true for
    monotone relaxations such as shortest distances or min-labels). The
    engine uses it to retire provably dead workitems at delivery time.
    """

    statements: tuple[Statement, ...]
    schema: WorkItemSchema | None = None
    stable_conditions: bool = False


def evaluate_pf(pf: ProcessingFunction, w: WorkItem,
                states: Mapping[str, list], graph: Graph
                ) -> tuple[bool, list[WorkItem]]:
    """Evaluate one workitem: returns (applied, produced items).

    Statements are tried in declaration order; at most one fires. When none
    fires the item was wasted work: no state changes, no output.
    """
    if pf.schema is not None and len(w) != pf.schema.arity + 1:
        raise SchemaError(
            f"workitem {w!r} does not match schema arity {pf.schema.arity}")
    for st in pf.statements:
        if st.condition(w, states, graph):
            outs = st.constructor(w, states, graph)
            st.state_update(w, states, graph)
            return True, outs
    return False, []


def would_fire(pf: ProcessingFunction, w: WorkItem,
               states: Mapping[str, list], graph: Graph) -> bool:
    """True when some statement's condition currently holds for ``w``."""
    return any(st.condition(w, states, graph) for st in pf.statements)


@dataclass
class StateMap:
    """One named, vertex-indexed state mapping.

    ``values`` is mutated in place by the engine under its ownership
    contract; ``kind`` drives integer-vs-real rendering in outputs.
    """

    name: str
    values: list
    init: float
    kind: str = REAL_KIND

    @classmethod
    def filled(cls, name: str, n: int, init, kind: str = REAL_KIND) -> StateMap:
        return cls(name=name, values=[init] * n, init=init, kind=kind)


@dataclass
class AgmInstance:
    """The runnable 6-tuple: graph, schema, states, processing function,
    ordering, and initial workitem set.

    ``result_state`` names the map holding the algorithm's answer;
    ``needs_transpose`` requires ``graph`` to carry its reversed adjacency.
    """

    graph: Graph
    schema: WorkItemSchema
    states: dict[str, StateMap] = field(default_factory=dict)
    pf: ProcessingFunction = None
    ordering: OrderingDescriptor = None
    initial: list[WorkItem] = field(default_factory=list)
    needs_transpose: bool = False
    result_state: str = ""

    def validate(self) -> None:
        for name, sm in self.states.items():
            if len(sm.values) != self.graph.n:
                raise ParameterError(
                    f"state {name!r} has length {len(sm.values)}, expected {self.graph.n}")
        for w in self.initial:
            self.schema.check(w, self.graph.n)
        if self.needs_transpose and not self.graph.has_in_edges:
            raise ParameterError("instance requires the reversed adjacency")
        if self.result_state and self.result_state not in self.states:
            raise ParameterError(f"unknown result state {self.result_state!r}")
