"""Hierarchical netlist core.

A circuit is a tree of ``BlockInstance`` objects. Leaves are devices
(transistors, capacitors); inner nodes are functional blocks that own named
children, a set of internal connections between child pins, and a pin map
that exposes a fixed per-block-type pin vocabulary to the outside.

Key operations:

* ``connect`` merges the nets of two pins anywhere in the tree (pure,
  returns a new root).
* ``flatten`` produces the device-level netlist: the list of devices plus
  the net partition (transitive closure of all connections, with the
  gate-drain short of diode transistors materialized).

Instances are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Optional


class Doping(Enum):
    N = "n"
    P = "p"

    @property
    def complement(self) -> "Doping":
        return Doping.P if self is Doping.N else Doping.N


class DeviceKind(Enum):
    NORMAL_TRANSISTOR = "nt"
    DIODE_TRANSISTOR = "dt"
    CAPACITOR = "cap"


class NetRole(Enum):
    SIGNAL = "signal"
    SUPPLY_RAIL_POSITIVE = "vdd"
    SUPPLY_RAIL_NEGATIVE = "vss"
    BIAS_INPUT = "bias_input"
    INTERNAL = "internal"


TRANSISTOR_PINS = ("gate", "drain", "source")
CAPACITOR_PINS = ("plus", "minus")


class NetlistError(Exception):
    """Structural error in a netlist operation."""


@dataclass(frozen=True, order=True)
class PinId:
    """A pin of an instance in the tree: (path from root, pin name)."""

    owner: tuple[str, ...]
    name: str

    def __str__(self) -> str:
        return "/".join(self.owner + (self.name,)) if self.owner else self.name


# An endpoint inside one instance: (child name, pin of that child).
Endpoint = tuple[str, str]


@dataclass(frozen=True)
class BlockType:
    """A functional block type with its fixed pin vocabulary."""

    name: str
    level: int  # hierarchy level, 1 (devices) .. 5 (op-amps)
    pin_names: tuple[str, ...]
    transistor_count_class: Optional[int] = None

    def __post_init__(self) -> None:
        if not 1 <= self.level <= 5:
            raise NetlistError(f"hierarchy level out of range: {self.level}")


class BlockInstance:
    """An immutable node of the hierarchical netlist.

    Leaves carry ``device=(kind, doping)`` and their pins are the device
    pins. Inner nodes own ``children`` (name -> BlockInstance), a frozenset
    of ``connections`` (unordered Endpoint pairs), and a ``pin_map`` from
    their own pin vocabulary to endpoints on children. ``meta`` is free-form
    read-only metadata (implementation slug, stage info, ...).
    """

    __slots__ = (
        "name",
        "block_type",
        "doping",
        "device",
        "children",
        "connections",
        "pin_map",
        "extra_leaf_connections",
        "meta",
        "_n_transistors",
        "_flat",
        "_digest",
        "_digest_swap",
    )

    def __init__(
        self,
        name: str,
        block_type: BlockType,
        *,
        doping: Optional[Doping] = None,
        device: Optional[tuple[DeviceKind, Optional[Doping]]] = None,
        children: Optional[Mapping[str, "BlockInstance"]] = None,
        connections: Iterable[tuple[Endpoint, Endpoint]] = (),
        pin_map: Optional[Mapping[str, Endpoint]] = None,
        extra_leaf_connections: Iterable[tuple[PinId, PinId]] = (),
        meta: Optional[Mapping[str, object]] = None,
    ) -> None:
        self.name = name
        self.block_type = block_type
        self.doping = doping
        self.device = device
        self.children: Mapping[str, BlockInstance] = MappingProxyType(
            dict(children or {})
        )
        self.connections = frozenset(frozenset(pair) for pair in connections)
        self.pin_map: Mapping[str, Endpoint] = MappingProxyType(dict(pin_map or {}))
        self.extra_leaf_connections = tuple(extra_leaf_connections)
        self.meta: Mapping[str, object] = MappingProxyType(dict(meta or {}))
        self._n_transistors: Optional[int] = None
        self._flat: Optional["FlatNetlist"] = None
        self._digest = None
        self._digest_swap = None

        if device is not None and self.children:
            raise NetlistError(f"leaf instance {name!r} cannot have children")
        if device is None and not self.children:
            raise NetlistError(f"inner instance {name!r} needs children")
        if device is None:
            missing = [p for p in block_type.pin_names if p not in self.pin_map]
            if missing:
                raise NetlistError(
                    f"{block_type.name} instance {name!r} lacks pins {missing}"
                )

    # -- queries ---------------------------------------------------------

    @property
    def is_leaf(self) -> bool:
        return self.device is not None

    @property
    def pins(self) -> tuple[str, ...]:
        return self.block_type.pin_names

    def n_transistors(self) -> int:
        if self._n_transistors is None:
            if self.is_leaf:
                kind = self.device[0]
                n = 0 if kind is DeviceKind.CAPACITOR else 1
            else:
                n = sum(c.n_transistors() for c in self.children.values())
            self._n_transistors = n
        return self._n_transistors

    def child(self, name: str) -> "BlockInstance":
        try:
            return self.children[name]
        except KeyError:
            raise NetlistError(f"no child {name!r} in {self.name!r}") from None

    def find(self, path: tuple[str, ...]) -> "BlockInstance":
        inst = self
        for part in path:
            inst = inst.child(part)
        return inst

    def resolve_pin(self, pin: str) -> PinId:
        """Resolve one of this instance's own pins to the leaf device pin."""
        if self.is_leaf:
            if pin not in self.pins:
                raise NetlistError(f"device {self.name!r} has no pin {pin!r}")
            return PinId((), pin)
        try:
            child_name, child_pin = self.pin_map[pin]
        except KeyError:
            raise NetlistError(
                f"{self.block_type.name} {self.name!r} has no pin {pin!r}"
            ) from None
        inner = self.children[child_name].resolve_pin(child_pin)
        return PinId((child_name,) + inner.owner, inner.name)

    def leaf_pin(self, pin_id: PinId) -> PinId:
        """Resolve an arbitrary PinId (any tree depth) to its leaf pin."""
        inst = self.find(pin_id.owner)
        inner = inst.resolve_pin(pin_id.name)
        return PinId(pin_id.owner + inner.owner, inner.name)

    def walk_leaves(self, prefix: tuple[str, ...] = ()):
        if self.is_leaf:
            yield prefix, self
        else:
            for name, c in self.children.items():
                yield from c.walk_leaves(prefix + (name,))

    # -- construction helpers -------------------------------------------

    def with_meta(self, **extra: object) -> "BlockInstance":
        meta = dict(self.meta)
        meta.update(extra)
        return BlockInstance(
            self.name,
            self.block_type,
            doping=self.doping,
            device=self.device,
            children=self.children,
            connections=[tuple(p) for p in self.connections],
            pin_map=self.pin_map,
            extra_leaf_connections=self.extra_leaf_connections,
            meta=meta,
        )

    def renamed(self, name: str) -> "BlockInstance":
        return BlockInstance(
            name,
            self.block_type,
            doping=self.doping,
            device=self.device,
            children=self.children,
            connections=[tuple(p) for p in self.connections],
            pin_map=self.pin_map,
            extra_leaf_connections=self.extra_leaf_connections,
            meta=self.meta,
        )

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        kind = self.device[0].value if self.is_leaf else self.block_type.name
        return f"<{kind} {self.name!r}>"


# ---------------------------------------------------------------------------
# Device-level (flat) netlist
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlatDevice:
    path: tuple[str, ...]
    kind: DeviceKind
    doping: Optional[Doping]

    @property
    def pins(self) -> tuple[str, ...]:
        if self.kind is DeviceKind.CAPACITOR:
            return CAPACITOR_PINS
        return TRANSISTOR_PINS

    @property
    def label(self) -> str:
        return "/".join(self.path)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass(frozen=True)
class FlatNetlist:
    """Devices plus the net partition over their pins."""

    devices: tuple[FlatDevice, ...]
    nets: tuple[frozenset[PinId], ...]
    roles: Mapping[int, NetRole] = field(default_factory=dict)
    ports: Mapping[str, int] = field(default_factory=dict)  # external pin -> net

    def net_index(self, pin: PinId) -> int:
        for i, net in enumerate(self.nets):
            if pin in net:
                return i
        raise NetlistError(f"pin {pin} not in any net")

    @property
    def net_of(self) -> Mapping[PinId, int]:
        mapping: dict[PinId, int] = {}
        for i, net in enumerate(self.nets):
            for pin in net:
                mapping[pin] = i
        return mapping

    def transistors(self) -> list[FlatDevice]:
        return [d for d in self.devices if d.kind is not DeviceKind.CAPACITOR]

    def role(self, index: int) -> NetRole:
        return self.roles.get(index, NetRole.INTERNAL)

    def with_roles(self, roles: Mapping[int, NetRole], ports: Mapping[str, int]):
        return FlatNetlist(self.devices, self.nets, dict(roles), dict(ports))


_PORT_ROLES = {
    "vdd": NetRole.SUPPLY_RAIL_POSITIVE,
    "vss": NetRole.SUPPLY_RAIL_NEGATIVE,
    "p_bias": NetRole.BIAS_INPUT,
}


def flatten(root: BlockInstance) -> FlatNetlist:
    """Flatten an instance tree to devices + net partition.

    Every diode transistor contributes a gate-drain merge. Net roles are
    derived from the root pin map: pins named ``vdd``/``vss``/``p_bias``
    mark the rails and the bias input, every other root pin marks a signal
    net. Results are cached on the instance (instances are immutable).
    """
    if root._flat is not None:
        return root._flat

    devices: list[FlatDevice] = []
    for path, leaf in root.walk_leaves():
        kind, doping = leaf.device
        devices.append(FlatDevice(path, kind, doping))

    uf = _UnionFind()
    for dev in devices:
        for pin in dev.pins:
            uf.find(PinId(dev.path, pin))
        if dev.kind is DeviceKind.DIODE_TRANSISTOR:
            uf.union(PinId(dev.path, "gate"), PinId(dev.path, "drain"))

    def add_connections(inst: BlockInstance, prefix: tuple[str, ...]) -> None:
        for pair in inst.connections:
            pair = tuple(pair)
            if len(pair) == 1:  # self-connection, no-op
                continue
            (ca, pa), (cb, pb) = pair
            a = inst.leaf_pin(PinId((ca,), pa))
            b = inst.leaf_pin(PinId((cb,), pb))
            uf.union(
                PinId(prefix + a.owner, a.name), PinId(prefix + b.owner, b.name)
            )
        for name, c in inst.children.items():
            if not c.is_leaf:
                add_connections(c, prefix + (name,))

    add_connections(root, ())
    for a, b in root.extra_leaf_connections:
        uf.union(root.leaf_pin(a), root.leaf_pin(b))

    groups: dict[PinId, list[PinId]] = {}
    for pin in list(uf.parent):
        groups.setdefault(uf.find(pin), []).append(pin)
    nets = tuple(sorted((frozenset(g) for g in groups.values()), key=sorted))

    flat = FlatNetlist(tuple(devices), nets)

    roles: dict[int, NetRole] = {}
    ports: dict[str, int] = {}
    if not root.is_leaf:
        for pin in root.pins:
            leaf = root.resolve_pin(pin)
            idx = flat.net_index(leaf)
            ports[pin] = idx
            roles[idx] = _PORT_ROLES.get(pin, NetRole.SIGNAL)
        flat = flat.with_roles(roles, ports)

    root._flat = flat
    return flat


def connect(root: BlockInstance, a: PinId, b: PinId) -> BlockInstance:
    """Return a new root with the nets of pins ``a`` and ``b`` merged.

    Idempotent: connecting pins that already share a net yields a netlist
    with the same partition. Unknown pins raise ``NetlistError`` naming the
    missing (owner, name).
    """
    for pin in (a, b):
        try:
            root.leaf_pin(pin)
        except NetlistError:
            raise NetlistError(f"unknown pin ({pin.owner}, {pin.name!r})") from None
    if a == b:
        return root
    la, lb = root.leaf_pin(a), root.leaf_pin(b)
    return BlockInstance(
        root.name,
        root.block_type,
        doping=root.doping,
        device=root.device,
        children=root.children,
        connections=[tuple(p) for p in root.connections],
        pin_map=root.pin_map,
        extra_leaf_connections=root.extra_leaf_connections + ((la, lb),),
        meta=root.meta,
    )
