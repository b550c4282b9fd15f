"""Generic functional-block synthesis engine.

A ``ComposerTask`` bundles the implementation sets of the subblocks, the
characteristic connections between them, the rule set a candidate must
satisfy, and optional additional-connection sets. ``compose`` enumerates
the cartesian product of the sets, wires each tuple, filters by rules and
emits deduplicated new block instances.

Connection selectors support disjunctions (``(in1 | out1) <-> in1``); each
resolvable alternative produces its own candidate, and the rule check
decides which survive. Additional-connection sets are applied cumulatively:
set k extends the candidate already extended by sets 1..k-1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from .digest import canonical_digest
from .netlist import (
    BlockInstance,
    BlockType,
    DeviceKind,
    Doping,
    FlatNetlist,
    NetlistError,
    PinId,
    flatten,
)


class ComposerError(Exception):
    """Ill-defined task (e.g. a pin selector that resolves nowhere)."""


# ---------------------------------------------------------------------------
# Pin selectors and connection specs
# ---------------------------------------------------------------------------

# Pin-name fallbacks so generic selectors work across vocabularies
# (a simple voltage bias calls its input "in", a current bias "in1").
_ALIASES = {
    "in1": ("in",),
    "in": ("in1",),
    "out1": ("out",),
    "out": ("out1",),
}


@dataclass(frozen=True)
class PinSel:
    """Selects a pin on tuple element ``index`` (0-based); ``names`` are
    disjunctive alternatives tried in order."""

    index: int
    names: tuple[str, ...]

    @staticmethod
    def of(index: int, *names: str) -> "PinSel":
        return PinSel(index, tuple(names))

    def resolve(self, parts: Sequence[BlockInstance]) -> list[str]:
        """Concrete pin names of this selector on the given tuple."""
        inst = parts[self.index]
        vocab = inst.pins
        found = []
        for name in self.names:
            if name in vocab:
                found.append(name)
            else:
                for alias in _ALIASES.get(name, ()):
                    if alias in vocab and alias not in found:
                        found.append(alias)
                        break
        return found


Guard = Callable[[Sequence[BlockInstance]], bool]


@dataclass(frozen=True)
class ConnectionSpec:
    left: PinSel
    right: PinSel
    when: Optional[Guard] = None  # spec applies only if the guard holds

    def alternatives(
        self, parts: Sequence[BlockInstance]
    ) -> list[tuple[tuple[int, str], tuple[int, str]]]:
        if self.when is not None and not self.when(parts):
            return []
        lefts = self.left.resolve(parts)
        rights = self.right.resolve(parts)
        if not lefts or not rights:
            raise ComposerError(
                f"selector {self.left}/{self.right} resolves to nothing on "
                f"{[p.block_type.name for p in parts]}"
            )
        return [
            ((self.left.index, l), (self.right.index, r))
            for l in lefts
            for r in rights
        ]


def conn(i: int, a: str, j: int, b: str, when: Optional[Guard] = None) -> ConnectionSpec:
    return ConnectionSpec(PinSel.of(i, a), PinSel.of(j, b), when)


def conn_any(
    i: int, names: Iterable[str], j: int, b: str, when: Optional[Guard] = None
) -> ConnectionSpec:
    return ConnectionSpec(PinSel(i, tuple(names)), PinSel.of(j, b), when)


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rule:
    """A structural rule checked on the flattened candidate.

    ``required``/``forbidden`` rules relate pin selector groups; a group is
    satisfied if any of its selectors resolves into the tested net, so a
    right-hand side of several selectors expresses a disjunction.
    """

    kind: str  # "required" | "forbidden" | "basic"
    name: str
    left: tuple[PinSel, ...] = ()
    right: tuple[PinSel, ...] = ()
    predicate: Optional[Callable[[BlockInstance, FlatNetlist], bool]] = None

    @staticmethod
    def required(name: str, left, right) -> "Rule":
        return Rule("required", name, _selgroup(left), _selgroup(right))

    @staticmethod
    def forbidden(name: str, left, right) -> "Rule":
        return Rule("forbidden", name, _selgroup(left), _selgroup(right))

    @staticmethod
    def basic(name: str, predicate) -> "Rule":
        return Rule("basic", name, predicate=predicate)

    def _connected(self, candidate: BlockInstance, flat: FlatNetlist) -> bool:
        """True if some left selector shares a net with some right selector.

        Selectors that resolve to no pin contribute nothing, so a forbidden
        rule over a pin a given implementation lacks is vacuously satisfied.
        """
        names = candidate.meta.get("child_order") or tuple(sorted(candidate.children))
        parts = [candidate.children[n] for n in names]
        net_of = flat.net_of

        def nets(group: tuple[PinSel, ...]) -> set[int]:
            out = set()
            for sel in group:
                child = names[sel.index]
                for pin in sel.resolve(parts):
                    leaf = candidate.leaf_pin(PinId((child,), pin))
                    out.add(net_of[leaf])
            return out

        return bool(nets(self.left) & nets(self.right))

    def holds(self, candidate: BlockInstance, flat: FlatNetlist) -> bool:
        if self.kind == "required":
            return self._connected(candidate, flat)
        if self.kind == "forbidden":
            return not self._connected(candidate, flat)
        return bool(self.predicate(candidate, flat))


def _selgroup(sels) -> tuple[PinSel, ...]:
    if isinstance(sels, PinSel):
        return (sels,)
    return tuple(sels)


def _dp_leaf_paths(inst: BlockInstance, prefix: tuple[str, ...] = ()) -> set:
    """Leaf paths of all transistors that are halves of differential pairs."""
    paths: set = set()
    if inst.block_type.name == "dp":
        for path, _leaf in inst.walk_leaves(prefix):
            paths.add(path)
        return paths
    if not inst.is_leaf:
        for name, child in inst.children.items():
            paths |= _dp_leaf_paths(child, prefix + (name,))
    return paths


def no_same_doping_drain_drain(candidate: BlockInstance, flat: FlatNetlist) -> bool:
    """Basic structural rule: no two same-doping transistor drains share a
    net. Differential-pair halves are exempt: cross-coupling the outputs of
    two pairs (the common-mode feedback transconductance) is the one
    structure that legitimately merges same-doping drains."""
    dp_paths = _dp_leaf_paths(candidate)
    net_of = flat.net_of
    by_key: dict[tuple[int, Doping], list] = {}
    for dev in flat.devices:
        if dev.kind is DeviceKind.CAPACITOR:
            continue
        net = net_of[PinId(dev.path, "drain")]
        by_key.setdefault((net, dev.doping), []).append(dev)
    for devs in by_key.values():
        if len(devs) > 1 and not all(d.path in dp_paths for d in devs):
            return False
    return True


BASIC_STRUCTURAL_RULE = Rule.basic("no-same-doping-drain-drain", no_same_doping_drain_drain)


def satisfies_rules(
    candidate: BlockInstance, rules: Sequence[Rule]
) -> tuple[bool, Optional[Rule]]:
    """Check all rules plus the global drain-drain rule.

    Returns (ok, first violated rule). The drain-drain rule is always
    applied; an empty rule list is vacuously satisfied apart from it.
    """
    flat = flatten(candidate)
    for rule in tuple(rules) + (BASIC_STRUCTURAL_RULE,):
        if not rule.holds(candidate, flat):
            return False, rule
    return True, None


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------


def guard_nt_equal(i: int, j: int) -> Guard:
    return lambda parts: parts[i].n_transistors() == parts[j].n_transistors()


def guard_same_impl(i: int, j: int) -> Guard:
    return lambda parts: canonical_digest(parts[i]) == canonical_digest(parts[j])


def guard_sym(i: int, j: int) -> Guard:
    """Same structure, complementary doping."""

    def check(parts: Sequence[BlockInstance]) -> bool:
        a, b = parts[i], parts[j]
        if a.doping is None or b.doping is None or a.doping == b.doping:
            return False
        return canonical_digest(a) == canonical_digest(b, swap_doping=True)

    return check


def guard_nt_is(i: int, n: int) -> Guard:
    return lambda parts: parts[i].n_transistors() == n


# ---------------------------------------------------------------------------
# The task and the algorithm
# ---------------------------------------------------------------------------

Typer = Callable[
    [Sequence[BlockInstance], BlockInstance],
    tuple[BlockType, dict[str, tuple[str, str]], dict],
]


@dataclass
class ComposerTask:
    name: str
    sets: list[list[BlockInstance]]
    characteristic: list[ConnectionSpec] = field(default_factory=list)
    rules: list[Rule] = field(default_factory=list)
    additional: list[list[ConnectionSpec]] = field(default_factory=list)
    typer: Optional[Typer] = None  # assigns (type, pin map, meta) to survivors
    guards: list[Guard] = field(default_factory=list)
    doping: Optional[Doping] = None
    child_names: Optional[list[str]] = None  # defaults to s1..si

    def child_name(self, index: int) -> str:
        if self.child_names is not None:
            return self.child_names[index]
        return f"s{index + 1}"


def _build_candidate(
    task: ComposerTask,
    parts: Sequence[BlockInstance],
    connections: list[tuple[tuple[int, str], tuple[int, str]]],
) -> BlockInstance:
    children = {
        task.child_name(i): part.renamed(task.child_name(i))
        for i, part in enumerate(parts)
    }
    pairs = [
        ((task.child_name(i), a), (task.child_name(j), b))
        for (i, a), (j, b) in connections
    ]
    placeholder = BlockType(f"_candidate_{task.name}", 2, ())
    return BlockInstance(
        f"c_{task.name}",
        placeholder,
        doping=task.doping,
        children=children,
        connections=pairs,
        pin_map={},
        meta={"child_order": tuple(task.child_name(i) for i in range(len(parts)))},
    )


def _emit(
    task: ComposerTask,
    parts: Sequence[BlockInstance],
    candidate: BlockInstance,
    out: dict,
) -> None:
    digest = canonical_digest(candidate)
    if digest in out:
        return
    if task.typer is None:
        out[digest] = candidate
        return
    block_type, pin_map, meta = task.typer(parts, candidate)
    inst = BlockInstance(
        f"{block_type.name}_{digest.short()}",
        block_type,
        doping=task.doping,
        device=None,
        children=candidate.children,
        connections=[tuple(p) for p in candidate.connections],
        pin_map=pin_map,
        meta=meta,
    )
    out[digest] = inst


def compose(task: ComposerTask) -> list[BlockInstance]:
    """Enumerate all structural implementations a task allows.

    Tuple order is the deterministic order of the input sets; the output is
    deduplicated by canonical digest and digest-sorted, so it is independent
    of input ordering.
    """
    if not task.sets or any(len(s) == 0 for s in task.sets):
        raise ComposerError(f"task {task.name}: empty implementation set")

    out: dict = {}
    for parts in itertools.product(*task.sets):
        if any(not g(parts) for g in task.guards):
            continue

        # expand characteristic-connection disjunctions into alternatives
        per_spec = [spec.alternatives(parts) for spec in task.characteristic]
        per_spec = [alts for alts in per_spec if alts]  # guarded-off specs drop out
        base_variants = [list(combo) for combo in itertools.product(*per_spec)] or [[]]

        for base in base_variants:
            candidate = _build_candidate(task, parts, base)
            ok, _ = satisfies_rules(candidate, task.rules)
            if ok:
                _emit(task, parts, candidate, out)
            # additional connections extend the candidate cumulatively
            grown = list(base)
            for extra_set in task.additional:
                extra = []
                for spec in extra_set:
                    extra.extend(spec.alternatives(parts))
                if not extra:
                    continue
                grown = grown + extra
                candidate = _build_candidate(task, parts, grown)
                ok, _ = satisfies_rules(candidate, task.rules)
                if ok:
                    _emit(task, parts, candidate, out)

    return [out[d] for d in sorted(out)]
