"""Functional block type registry and the basic implementation library.

Hierarchy levels:

1. devices: normal transistor, diode transistor, capacitor
2. structures: voltage bias (simple/cascode), current bias (simple/cascode),
   differential pair
3. amplification-stage subblocks: load parts, loads, transconductances,
   stage biases
4. op-amp subblocks: amplification stages, op-amp bias
5. op-amps

HL1-HL2 blocks and the op-amp-type-specific HL3-HL4 blocks are built
upfront and stored; block families with many implementations (load parts,
loads, first stages, op-amps) are filled on demand through registered
enumeration callbacks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Optional

from .composer import (
    ComposerError,
    ComposerTask,
    PinSel,
    Rule,
    conn,
    compose,
)
from .digest import canonical_digest
from .netlist import (
    BlockInstance,
    BlockType,
    CAPACITOR_PINS,
    DeviceKind,
    Doping,
    NetlistError,
    PinId,
    TRANSISTOR_PINS,
    flatten,
)

# ---------------------------------------------------------------------------
# Block types with fixed vocabularies
# ---------------------------------------------------------------------------

NT = BlockType("nt", 1, TRANSISTOR_PINS, 1)
DT = BlockType("dt", 1, TRANSISTOR_PINS, 1)
CAP = BlockType("cap", 1, CAPACITOR_PINS, None)

VB_SIMPLE = BlockType("vb_simple", 2, ("in", "out1", "source"), 1)
VB_CASCODE = BlockType("vb_cascode", 2, ("in", "out1", "out2", "inner", "source"), 2)
CB_SIMPLE = BlockType("cb_simple", 2, ("in1", "out1", "source"), 1)
CB_CASCODE = BlockType("cb_cascode", 2, ("in1", "in2", "out1", "inner", "source"), 2)
DP = BlockType("dp", 2, ("in1", "in2", "out1", "out2", "source"), 2)

_DYNAMIC_TYPES: dict[tuple, BlockType] = {}


def make_type(
    name: str, level: int, pins: Iterable[str], nt_class: Optional[int] = None
) -> BlockType:
    """Dynamic block types for blocks whose vocabulary depends on their
    parts (load parts, loads, stages, op-amps)."""
    key = (name, level, tuple(pins), nt_class)
    if key not in _DYNAMIC_TYPES:
        _DYNAMIC_TYPES[key] = BlockType(name, level, tuple(pins), nt_class)
    return _DYNAMIC_TYPES[key]


# ---------------------------------------------------------------------------
# HL1: device prototypes
# ---------------------------------------------------------------------------


def normal_transistor(doping: Doping, name: str = "nt") -> BlockInstance:
    return BlockInstance(
        name, NT, doping=doping, device=(DeviceKind.NORMAL_TRANSISTOR, doping)
    )


def diode_transistor(doping: Doping, name: str = "dt") -> BlockInstance:
    return BlockInstance(
        name, DT, doping=doping, device=(DeviceKind.DIODE_TRANSISTOR, doping)
    )


def capacitor(name: str = "cap") -> BlockInstance:
    return BlockInstance(name, CAP, device=(DeviceKind.CAPACITOR, None))


def device_prototypes(doping: Doping) -> dict[str, BlockInstance]:
    """Fresh HL1 leaf instances for one doping (plus the capacitor)."""
    return {
        "nt": normal_transistor(doping),
        "dt": diode_transistor(doping),
        "cap": capacitor(),
    }


# ---------------------------------------------------------------------------
# HL2 composer tasks
# ---------------------------------------------------------------------------


def _hl2_typer(block_type: BlockType, pin_map: dict, slug_fn) -> Callable:
    def typer(parts, candidate):
        return block_type, pin_map, {"slug": slug_fn(parts, candidate)}

    return typer


def _vb_simple_slug(parts, _candidate) -> str:
    return "vb_dt" if parts[0].device[0] is DeviceKind.DIODE_TRANSISTOR else "vb_nt"


def _stack_slug(prefix: str, named: dict[str, str]):
    """Classify a two-transistor stack by (bottom kind, gate tie?)."""

    def slug(parts, candidate) -> str:
        bottom_dt = parts[0].device[0] is DeviceKind.DIODE_TRANSISTOR
        top_dt = parts[1].device[0] is DeviceKind.DIODE_TRANSISTOR
        flat = flatten(candidate)
        net_of = flat.net_of
        tied = net_of[PinId(("s1",), "gate")] == net_of[PinId(("s2",), "gate")]
        top_fed = net_of[PinId(("s2",), "drain")] == net_of[PinId(("s1",), "gate")]
        key = (bottom_dt, top_dt, tied, top_fed)
        return named.get(key, f"{prefix}_x")

    return slug


_VB_CASCODE_NAMES = {
    (True, True, False, False): "vb_dip",  # diode pair
    (False, True, False, False): "vb_mp",  # mixed pair
    (False, True, True, True): "vb_vr2",  # voltage reference 2
    (False, False, True, True): "vb_vr1",  # voltage reference 1
}

_CB_CASCODE_NAMES = {
    (False, False, False, False): "cb_cas",
    (False, False, True, False): "cb_cas_tied",
    (True, False, False, False): "cb_wilson",
    (True, False, True, False): "cb_wilson_tied",
}


def vb_simple_task(doping: Doping) -> ComposerTask:
    pin_map = {"in": ("s1", "drain"), "out1": ("s1", "gate"), "source": ("s1", "source")}
    return ComposerTask(
        name=f"vb_simple_{doping.value}",
        sets=[[normal_transistor(doping), diode_transistor(doping)]],
        typer=_hl2_typer(VB_SIMPLE, pin_map, _vb_simple_slug),
        doping=doping,
    )


_CASCODE_PIN_MAP = {
    "in": ("s2", "drain"),
    "out1": ("s1", "gate"),
    "out2": ("s2", "gate"),
    "inner": ("s1", "drain"),
    "source": ("s1", "source"),
}


def vb_cascode_task(doping: Doping) -> ComposerTask:
    devices = [normal_transistor(doping), diode_transistor(doping)]
    return ComposerTask(
        name=f"vb_cascode_{doping.value}",
        sets=[devices, [d.renamed(d.name) for d in devices]],
        characteristic=[conn(0, "drain", 1, "source")],
        rules=[
            # the bias input (top drain) must drive one of the two gates
            Rule.required(
                "input-drives-a-gate",
                PinSel.of(1, "drain"),
                [PinSel.of(0, "gate"), PinSel.of(1, "gate")],
            ),
        ],
        additional=[
            [conn(0, "gate", 1, "gate")],
            [conn(1, "drain", 0, "gate")],
        ],
        typer=_hl2_typer(
            VB_CASCODE, _CASCODE_PIN_MAP, _stack_slug("vb_cas", _VB_CASCODE_NAMES)
        ),
        doping=doping,
    )


def cb_simple_task(doping: Doping) -> ComposerTask:
    pin_map = {"in1": ("s1", "gate"), "out1": ("s1", "drain"), "source": ("s1", "source")}
    return ComposerTask(
        name=f"cb_simple_{doping.value}",
        sets=[[normal_transistor(doping)]],
        typer=_hl2_typer(CB_SIMPLE, pin_map, lambda p, c: "cb_nt"),
        doping=doping,
    )


def cb_cascode_task(doping: Doping, include_diode: bool = True) -> ComposerTask:
    s1 = [normal_transistor(doping)]
    if include_diode:
        s1.append(diode_transistor(doping))
    pin_map = {
        "in1": ("s1", "gate"),
        "in2": ("s2", "gate"),
        "out1": ("s2", "drain"),
        "inner": ("s1", "drain"),
        "source": ("s1", "source"),
    }
    return ComposerTask(
        name=f"cb_cascode_{doping.value}",
        sets=[s1, [normal_transistor(doping)]],
        characteristic=[conn(0, "drain", 1, "source")],
        additional=[[conn(0, "gate", 1, "gate")]],
        typer=_hl2_typer(CB_CASCODE, pin_map, _stack_slug("cb_cas", _CB_CASCODE_NAMES)),
        doping=doping,
    )


def dp_task(doping: Doping) -> ComposerTask:
    pin_map = {
        "in1": ("s1", "gate"),
        "in2": ("s2", "gate"),
        "out1": ("s1", "drain"),
        "out2": ("s2", "drain"),
        "source": ("s1", "source"),
    }
    return ComposerTask(
        name=f"dp_{doping.value}",
        sets=[[normal_transistor(doping)], [normal_transistor(doping)]],
        characteristic=[conn(0, "source", 1, "source")],
        typer=_hl2_typer(DP, pin_map, lambda p, c: "dp"),
        doping=doping,
    )


# ---------------------------------------------------------------------------
# Implementation store
# ---------------------------------------------------------------------------


class Provenance(Enum):
    UPFRONT = "upfront"
    ON_DEMAND = "on_demand"


_EXPECTED_HL2 = {
    "vb_simple": 2,
    "vb_cascode": 4,
    "cb_simple": 1,
    "cb_cascode": 4,
    "dp": 1,
}


@dataclass
class _Family:
    implementations: dict[Optional[Doping], list[BlockInstance]]
    provenance: Provenance


class ImplementationStore:
    """Registry of stored block implementations keyed by family and doping.

    Upfront families are populated at construction; on-demand families are
    filled through a registered enumeration callback the first time they
    are requested, then cached.
    """

    def __init__(self) -> None:
        self._families: dict[str, _Family] = {}
        self._fillers: dict[str, Callable[["ImplementationStore", Optional[Doping]], list[BlockInstance]]] = {}

    def put(
        self,
        family: str,
        doping: Optional[Doping],
        implementations: list[BlockInstance],
        provenance: Provenance = Provenance.UPFRONT,
    ) -> None:
        if family not in self._families:
            self._families[family] = _Family({}, provenance)
        self._families[family].implementations[doping] = sorted(
            implementations, key=canonical_digest
        )

    def register_on_demand(self, family: str, filler) -> None:
        self._fillers[family] = filler

    def implementations_of(
        self, family: str, doping: Optional[Doping] = None
    ) -> list[BlockInstance]:
        fam = self._families.get(family)
        if fam is None or doping not in fam.implementations:
            if family in self._fillers:
                impls = self._fillers[family](self, doping)
                self.put(family, doping, impls, Provenance.ON_DEMAND)
            else:
                raise KeyError(f"unknown block family {family!r} (doping={doping})")
        return list(self._families[family].implementations[doping])

    def provenance(self, family: str) -> Provenance:
        if family in self._families:
            return self._families[family].provenance
        if family in self._fillers:
            return Provenance.ON_DEMAND
        raise KeyError(family)

    def by_slug(self, family: str, doping: Optional[Doping], slug: str) -> BlockInstance:
        for impl in self.implementations_of(family, doping):
            if impl.meta.get("slug") == slug:
                return impl
        raise KeyError(f"no {family} implementation with slug {slug!r}")

    def slugs(self, family: str, doping: Optional[Doping]) -> list[str]:
        return [i.meta.get("slug", "?") for i in self.implementations_of(family, doping)]


def build_basic_library(include_diode_in_cascode_cb: bool = True) -> ImplementationStore:
    """Create and store all HL1-HL2 implementations, both dopings.

    Asserts the per-family counts: 2 simple / 4 cascode voltage biases,
    1 simple / 4 cascode current biases, 1 differential pair per doping
    (cascode current biases drop to 2 when diode transistors are excluded
    from the first set).
    """
    store = ImplementationStore()
    store.put("cap", None, [capacitor()])
    for doping in (Doping.N, Doping.P):
        store.put("nt", doping, [normal_transistor(doping)])
        store.put("dt", doping, [diode_transistor(doping)])
        families = {
            "vb_simple": compose(vb_simple_task(doping)),
            "vb_cascode": compose(vb_cascode_task(doping)),
            "cb_simple": compose(cb_simple_task(doping)),
            "cb_cascode": compose(
                cb_cascode_task(doping, include_diode_in_cascode_cb)
            ),
            "dp": compose(dp_task(doping)),
        }
        for family, impls in families.items():
            expected = _EXPECTED_HL2[family]
            if family == "cb_cascode" and not include_diode_in_cascode_cb:
                expected = 2
            if len(impls) != expected:
                raise ComposerError(
                    f"{family} ({doping.value}): expected {expected} "
                    f"implementations, composed {len(impls)}"
                )
            store.put(family, doping, impls)
    return store


def voltage_biases(store: ImplementationStore, doping: Doping) -> list[BlockInstance]:
    return store.implementations_of("vb_simple", doping) + store.implementations_of(
        "vb_cascode", doping
    )


def current_biases(store: ImplementationStore, doping: Doping) -> list[BlockInstance]:
    return store.implementations_of("cb_simple", doping) + store.implementations_of(
        "cb_cascode", doping
    )
