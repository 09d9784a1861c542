"""Phase-by-phase execution of an instance across simulated ranks.

One *phase* drains one equivalence class: the minimal class (under the
induced class order) is selected from the pool of pending workitems, then
processed to quiescence in *sub-steps*. Within a sub-step every rank
processes its share of the class; produced items are exchanged at the
sub-step barrier. Items equivalent to the class join the next sub-step,
items ordered after it go back to the pool, and items ordered before it are
a monotonicity violation (fatal in strict mode, counted and pooled in
relaxed mode).

Two scheduling details matter for reproducibility:

* Within a rank's sub-step share, items for the same vertex are processed in
  ascending attribute order; the seeded shuffle randomizes order across
  vertices only. This keeps per-phase accounting independent of the seed and
  of the rank layout for monotone instances.
* Produced items whose processing function declares ``stable_conditions``
  are checked at the delivery barrier: an item none of whose guards can ever
  fire again is retired immediately (counted as processed and rejected in
  the producing phase) instead of surfacing later as a phantom equivalence
  class. Without this, a class made solely of dead items would add a phase,
  breaking the phase-count laws (e.g. breadth-first levels).
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import (AgmInstance, Ordering, OrderingDescriptor,
                   ProcessingFunction, WorkItem, evaluate_pf, would_fire)
from .errors import OrderingViolationError, ParameterError
from .graph import Distribution, Graph, owner

__all__ = [
    "EngineConfig",
    "PhaseRecord",
    "EngineStats",
    "RunResult",
    "PhaseObserver",
    "run",
    "select_min_class",
    "route",
]

# Observer: called after each drained class with (state snapshot, stats);
# returns True to continue, False to halt the run.
PhaseObserver = Callable[[Mapping[str, tuple], "EngineStats"], bool]

_SAME, _LATER, _EARLIER = 0, 1, -1


@dataclass
class EngineConfig:
    """Run parameters; defaults give a single-rank relaxed sequential run."""

    distribution: Distribution | None = None
    shuffle_seed: int = 0
    monotonicity_mode: str = "relaxed"  # "strict" | "relaxed"
    max_phases: int | None = None
    parallel_ranks: bool = False

    def __post_init__(self):
        if self.monotonicity_mode not in ("strict", "relaxed"):
            raise ParameterError(f"unknown mode {self.monotonicity_mode!r}")
        if self.max_phases is not None and self.max_phases < 1:
            raise ParameterError("max_phases must be >= 1")


@dataclass
class PhaseRecord:
    items_processed: int = 0
    updates_applied: int = 0
    updates_rejected: int = 0
    remote_messages: int = 0
    substeps: int = 0
    items_produced: int = 0


@dataclass
class EngineStats:
    """Per-phase records plus run-wide violation count."""

    phase_records: list[PhaseRecord] = field(default_factory=list)
    monotonicity_violations: int = 0

    @property
    def phases(self) -> int:
        return len(self.phase_records)

    def _total(self, attr: str) -> int:
        return sum(getattr(r, attr) for r in self.phase_records)

    @property
    def total_items(self) -> int:
        return self._total("items_processed")

    @property
    def total_applied(self) -> int:
        return self._total("updates_applied")

    @property
    def total_rejected(self) -> int:
        return self._total("updates_rejected")

    @property
    def total_remote(self) -> int:
        return self._total("remote_messages")

    @property
    def total_substeps(self) -> int:
        return self._total("substeps")

    @property
    def total_produced(self) -> int:
        return self._total("items_produced")


@dataclass
class RunResult:
    """Final state maps (as float arrays), stats, and how the run ended."""

    states: dict[str, np.ndarray]
    stats: EngineStats
    halted_by_observer: bool = False
    truncated: bool = False


class _KeyedPool:
    """Pending items bucketed by class key via a heap; O(log n) per item."""

    __slots__ = ("key", "desc", "heap", "seq")

    def __init__(self, key, desc: bool):
        self.key = key
        self.desc = desc
        self.heap: list[tuple] = []
        self.seq = 0

    def __len__(self):
        return len(self.heap)

    def push(self, w: WorkItem) -> None:
        k = self.key(w)
        import heapq
        heapq.heappush(self.heap, (-k if self.desc else k, self.seq, w))
        self.seq += 1

    def pop_min_class(self):
        import heapq
        heap = self.heap
        adj0, _, w0 = heapq.heappop(heap)
        members = [w0]
        while heap and heap[0][0] == adj0:
            members.append(heapq.heappop(heap)[2])
        return self.key(w0), members


class _ComparatorPool:
    """Fallback for orderings without a class key: linear scans per phase."""

    __slots__ = ("cmp", "items")

    def __init__(self, ordering: OrderingDescriptor):
        self.cmp = ordering.compare_fn
        self.items: list[WorkItem] = []

    def __len__(self):
        return len(self.items)

    def push(self, w: WorkItem) -> None:
        self.items.append(w)

    def pop_min_class(self):
        cmp = self.cmp
        items = self.items
        rep = items[0]
        for w in items:
            if cmp(w, rep) is Ordering.LESS:
                rep = w
        members, rest = [], []
        for w in items:
            if cmp(w, rep) is Ordering.EQUIVALENT:
                members.append(w)
            else:
                rest.append(w)
        self.items = rest
        return rep, members


def select_min_class(pool: Sequence[WorkItem], o: OrderingDescriptor):
    """All pool items not preceded by any other pool item.

    Returns ``(representative, members)``: the representative is the class
    key when ``o`` carries one, otherwise a member workitem.
    """
    items = list(pool)
    if not items:
        raise ParameterError("pool must be nonempty")
    if o.class_key is not None:
        keys = [o.class_key(w) for w in items]
        best = max(keys) if o.key_descending else min(keys)
        return best, [w for w, k in zip(items, keys) if k == best]
    rep = items[0]
    for w in items:
        if o.compare_fn(w, rep) is Ordering.LESS:
            rep = w
    return rep, [w for w in items if o.compare_fn(w, rep) is Ordering.EQUIVALENT]


def route(w: WorkItem, d: Distribution, producing_rank: int) -> tuple[int, bool]:
    """Owner rank of ``w`` and whether delivery crosses ranks."""
    target = owner(d, w[0])
    return target, target != producing_rank


def _attrs(w: WorkItem):
    return w[1:]


def _run_rank_share(rank: int, items: list[WorkItem], pf: ProcessingFunction,
                    states, g: Graph, rng_key: str, owner_of, count_remote: bool,
                    classify, strict: bool, rec: list):
    """Process one rank's slice of the current class for one sub-step.

    Returns (counts, same-class emissions, pool-bound emissions) where counts
    is (processed, applied, rejected, remote, produced, violations).
    Emissions keep production order; the coordinator merges them rank by rank
    at the barrier.
    """
    groups: dict[int, list[WorkItem]] = {}
    for w in items:
        grp = groups.get(w[0])
        if grp is None:
            groups[w[0]] = [w]
        else:
            grp.append(w)
    glist = list(groups.values())
    for grp in glist:
        if len(grp) > 1:
            grp.sort(key=_attrs)
    if len(glist) > 1:
        random.Random(rng_key).shuffle(glist)
    processed = applied = rejected = remote = produced = violations = 0
    emit_same: list[WorkItem] = []
    emit_pool: list[WorkItem] = []
    for grp in glist:
        for w in grp:
            fired, outs = evaluate_pf(pf, w, states, g)
            processed += 1
            if not fired:
                rejected += 1
                continue
            applied += 1
            for o in outs:
                produced += 1
                if count_remote and owner_of(o[0]) != rank:
                    remote += 1
                side = classify(o)
                if side == _SAME:
                    emit_same.append(o)
                else:
                    if side == _EARLIER:
                        if strict:
                            raise OrderingViolationError(
                                f"{o!r} is ordered before the class being drained ({rec[0]!r})")
                        violations += 1
                    emit_pool.append(o)
    return (processed, applied, rejected, remote, produced, violations), emit_same, emit_pool


def run(instance: AgmInstance, config: EngineConfig | None = None,
        observer: PhaseObserver | None = None) -> RunResult:
    """Execute ``instance`` to termination, observer halt, or phase cap.

    The initial workitem set seeds the pool; each iteration selects the
    minimal equivalence class, drains it to global quiescence in sub-steps,
    records one phase, and consults the observer. Terminates when the pool is
    empty; a tripped ``max_phases`` returns a partial result flagged
    ``truncated``.
    """
    cfg = config if config is not None else EngineConfig()
    instance.validate()
    g = instance.graph
    dist = cfg.distribution
    if dist is None:
        dist = Distribution(1, "block", g.n)
    elif dist.n != g.n:
        raise ParameterError(f"distribution is over {dist.n} vertices, graph has {g.n}")
    ranks = dist.ranks
    owner_of = dist.owner_fn()
    strict = cfg.monotonicity_mode == "strict"
    pf = instance.pf
    stable = pf.stable_conditions
    ordering = instance.ordering
    keyfn = ordering.class_key
    desc = ordering.key_descending
    cmpfn = ordering.compare_fn
    states = {name: sm.values for name, sm in instance.states.items()}
    conditions = tuple(st.condition for st in pf.statements)

    pool = _KeyedPool(keyfn, desc) if keyfn is not None else _ComparatorPool(ordering)
    for w in instance.initial:
        pool.push(w)

    stats = EngineStats()
    records = stats.phase_records
    halted = truncated = False
    executor = None
    if cfg.parallel_ranks and ranks > 1:
        executor = ThreadPoolExecutor(max_workers=ranks)
    try:
        while len(pool):
            if cfg.max_phases is not None and len(records) >= cfg.max_phases:
                truncated = True
                break
            phase_idx = len(records)
            rep, frontier = pool.pop_min_class()
            rec_holder = [rep]

            if keyfn is not None:
                def classify(o, _key=keyfn, _rep=rep, _desc=desc):
                    ko = _key(o)
                    if ko == _rep:
                        return _SAME
                    return _LATER if (ko > _rep) != _desc else _EARLIER
            else:
                def classify(o, _cmp=cmpfn, _rep=rep):
                    side = _cmp(o, _rep)
                    if side is Ordering.EQUIVALENT:
                        return _SAME
                    return _LATER if side is Ordering.GREATER else _EARLIER

            rec = PhaseRecord()
            while frontier:
                rec.substeps += 1
                if ranks > 1:
                    shares: list[list[WorkItem]] = [[] for _ in range(ranks)]
                    for w in frontier:
                        shares[owner_of(w[0])].append(w)
                else:
                    shares = [frontier]

                def job(rank, _sub=rec.substeps):
                    key = f"{cfg.shuffle_seed}|{phase_idx}|{_sub}|{rank}"
                    return _run_rank_share(rank, shares[rank], pf, states, g,
                                           key, owner_of, ranks > 1, classify,
                                           strict, rec_holder)

                if executor is not None:
                    results = list(executor.map(job, range(ranks)))
                else:
                    results = [job(rank) for rank in range(ranks)]

                # Barrier: merge counters, then deliver emissions rank by rank.
                frontier = []
                for counts, emit_same, emit_pool in results:
                    rec.items_processed += counts[0]
                    rec.updates_applied += counts[1]
                    rec.updates_rejected += counts[2]
                    rec.remote_messages += counts[3]
                    rec.items_produced += counts[4]
                    stats.monotonicity_violations += counts[5]
                    if stable:
                        for o in emit_same:
                            if _any_fires(conditions, o, states, g):
                                frontier.append(o)
                            else:
                                rec.items_processed += 1
                                rec.updates_rejected += 1
                        for o in emit_pool:
                            if _any_fires(conditions, o, states, g):
                                pool.push(o)
                            else:
                                rec.items_processed += 1
                                rec.updates_rejected += 1
                    else:
                        frontier.extend(emit_same)
                        for o in emit_pool:
                            pool.push(o)
            records.append(rec)
            if observer is not None:
                snapshot = {name: tuple(vals) for name, vals in states.items()}
                if not observer(snapshot, stats):
                    halted = True
                    break
    finally:
        if executor is not None:
            executor.shutdown(wait=False)

    final = {name: np.asarray(vals, dtype=np.float64)
             for name, vals in states.items()}
    return RunResult(states=final, stats=stats,
                     halted_by_observer=halted, truncated=truncated)


def _any_fires(conditions, w, states, g) -> bool:
    for cond in conditions:
        if cond(w, states, g):
            return True
    return False
