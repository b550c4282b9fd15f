"""Composition rules for every amplification-stage subblock, stage and
op-amp type, plus the per-type enumeration plans.

The generic composer does the enumeration; this module owns the tasks:
which implementation sets feed each block, how the subblocks are wired,
and which structural rules a candidate must satisfy. Participation sets
that the prose leaves open are pinned in ``data/calibration.json`` and
checked by the test suite against the published aggregate counts.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Optional, Sequence

from .composer import (
    ComposerError,
    ComposerTask,
    PinSel,
    Rule,
    compose,
    conn,
    guard_same_impl,
    guard_sym,
    satisfies_rules,
)
from .digest import canonical_digest
from .library import (
    CB_CASCODE,
    CB_SIMPLE,
    ImplementationStore,
    build_basic_library,
    capacitor,
    make_type,
)
from .netlist import (
    BlockInstance,
    DeviceKind,
    Doping,
    FlatNetlist,
    NetlistError,
    PinId,
    flatten,
)


class OpAmpType:
    SINGLE_OUTPUT = "so"
    FULLY_DIFFERENTIAL = "fd"
    COMPLEMENTARY = "comp"

    ALL = (SINGLE_OUTPUT, FULLY_DIFFERENTIAL, COMPLEMENTARY)


def load_calibration() -> dict:
    with resources.files("opsynth.data").joinpath("calibration.json").open() as fh:
        return json.load(fh)


_CAL = load_calibration()
LP_ROLES = {k: tuple(v) for k, v in _CAL["load_part_roles"].items() if isinstance(v, list)}
BIAS_INPUT_STAGE = tuple(_CAL["stage_bias"]["input_stage"])
BIAS_OUTPUT_STAGE = tuple(_CAL["stage_bias"]["output_stage"])
SYM_ASSEMBLY_LOADS = tuple(_CAL["symmetrical_assembly_loads"])
EXPECTED = _CAL["expected_counts"]


# ---------------------------------------------------------------------------
# Structural classification of load parts
# ---------------------------------------------------------------------------


def _gate_net_stats(flat: FlatNetlist) -> dict:
    """Per-net gate/drain/source membership over transistors."""
    net_of = flat.net_of
    stats: dict[int, dict[str, list]] = {}
    for dev in flat.devices:
        if dev.kind is DeviceKind.CAPACITOR:
            continue
        for pin in ("gate", "drain", "source"):
            idx = net_of[PinId(dev.path, pin)]
            stats.setdefault(idx, {"gate": [], "drain": [], "source": []})
            stats[idx][pin].append(dev)
    return stats


def lp_signature(lp: BlockInstance) -> dict:
    """Graph features that identify a standard load part implementation."""
    flat = flatten(lp)
    stats = _gate_net_stats(flat)
    net_of = flat.net_of
    n_dt = sum(1 for d in flat.devices if d.kind is DeviceKind.DIODE_TRANSISTOR)
    pure, driven = [], []
    for idx, members in stats.items():
        if members["gate"] and not members["drain"]:
            pure.append(len(members["gate"]))
        elif members["gate"] and members["drain"]:
            driven.append(len(members["gate"]))
    # a diode transistor stacked directly on another diode transistor
    dt_on_dt = 0
    for a in flat.devices:
        if a.kind is not DeviceKind.DIODE_TRANSISTOR:
            continue
        src = net_of[PinId(a.path, "source")]
        for b in flat.devices:
            if b is not a and b.kind is DeviceKind.DIODE_TRANSISTOR:
                if net_of[PinId(b.path, "drain")] == src:
                    dt_on_dt += 1
    return {
        "n_t": lp.n_transistors(),
        "n_dt": n_dt,
        "pure": tuple(sorted(pure)),
        "driven": tuple(sorted(driven)),
        "dt_on_dt": dt_on_dt,
    }


_LP_SLUGS = {
    (2, 0, (2,), (), 0): "lp_cb_pair",
    (2, 0, (), (2,), 0): "lp_self_pair",
    (2, 1, (), (2,), 0): "lp_mirror_simple",
    (4, 0, (2, 2), (), 0): "lp_cb_quad",
    (4, 0, (4,), (), 0): "lp_cb_quad_tied",
    (4, 0, (2,), (2,), 0): "lp_wide_swing",
    (4, 0, (), (4,), 0): "lp_self_quad",
    (4, 2, (), (2, 2), 1): "lp_mirror_cascode",
    (4, 2, (), (2, 2), 0): "lp_mirror_wilson",
    (4, 1, (2,), (2,), 0): "lp_mirror_ws_bias",
    (4, 1, (), (4,), 0): "lp_mirror_vr",
}


def lp_slug(lp: BlockInstance) -> str:
    sig = lp_signature(lp)
    key = (sig["n_t"], sig["n_dt"], sig["pure"], sig["driven"], sig["dt_on_dt"])
    return _LP_SLUGS.get(key, f"lp_unknown_{key}")


def has_rail_gate_net(lp: BlockInstance) -> bool:
    """True if the part has a pure gate net all of whose transistors sit
    with their sources on the part's source nets (the supply side). This is
    the net a common-mode feedback output may drive."""
    flat = flatten(lp)
    net_of = flat.net_of
    rails = {net_of[lp.resolve_pin("source1")], net_of[lp.resolve_pin("source2")]}
    stats = _gate_net_stats(flat)
    for members in stats.values():
        if not members["gate"] or members["drain"]:
            continue
        if all(net_of[PinId(t.path, "source")] in rails for t in members["gate"]):
            return True
    return False


# ---------------------------------------------------------------------------
# Load part tasks
# ---------------------------------------------------------------------------


def _lp_pins(n_t: int) -> tuple[str, ...]:
    pins = ["out1", "out2", "source1", "source2", "in1"]
    if n_t == 4:
        pins += ["in2", "inner1", "inner2"]
    return tuple(pins)


def _lp_typer(kind: str):
    """kind: 'cb' for the two-current-bias flavor, 'vbcb' for vb + cb."""

    def typer(parts, candidate):
        n_t = sum(p.n_transistors() for p in parts)
        pin_map = {
            "out1": ("s1", "in") if kind == "vbcb" else ("s1", "out1"),
            "out2": ("s2", "out1"),
            "source1": ("s1", "source"),
            "source2": ("s2", "source"),
            "in1": ("s2", "in1") if kind == "vbcb" else ("s1", "in1"),
        }
        if n_t == 4:
            pin_map["in2"] = ("s2", "in2") if kind == "vbcb" else ("s1", "in2")
            pin_map["inner1"] = ("s1", "inner")
            pin_map["inner2"] = ("s2", "inner")
        block_type = make_type("l_p_st", 3, _lp_pins(n_t), n_t)
        return block_type, pin_map, {}

    return typer


def lp_std_tasks(store: ImplementationStore, doping: Doping) -> list[ComposerTask]:
    """The standard load part: two current biases of the same implementation
    with their inputs connected, or a voltage and a current bias with the
    outputs connected to the inputs; sources tied in both flavors. Cascode
    pairs additionally admit the output-to-input extension (the wide-swing
    and self-biased variants)."""
    cbs = store.implementations_of("cb_simple", doping) + store.implementations_of(
        "cb_cascode", doping
    )
    vbs = store.implementations_of("vb_simple", doping) + store.implementations_of(
        "vb_cascode", doping
    )
    nt_equal = lambda parts: parts[0].n_transistors() == parts[1].n_transistors()
    cb_task = ComposerTask(
        name=f"lp_st_cb_{doping.value}",
        sets=[cbs, [c.renamed(c.name) for c in cbs]],
        guards=[guard_same_impl(0, 1)],
        characteristic=[
            conn(0, "source", 1, "source"),
            conn(0, "in1", 1, "in1"),
            conn(0, "in2", 1, "in2", when=lambda p: p[0].n_transistors() == 2),
        ],
        additional=[[conn(0, "out1", 1, "in1")]],
        typer=_lp_typer("cb"),
        doping=doping,
    )
    vb_task = ComposerTask(
        name=f"lp_st_vb_{doping.value}",
        sets=[vbs, cbs],
        guards=[nt_equal],
        characteristic=[
            conn(0, "source", 1, "source"),
            conn(0, "out1", 1, "in1"),
            conn(0, "out2", 1, "in2", when=lambda p: p[0].n_transistors() == 2),
        ],
        typer=_lp_typer("vbcb"),
        doping=doping,
    )
    return [cb_task, vb_task]


def lp_cascode_task(store: ImplementationStore, doping: Doping) -> ComposerTask:
    """Cascode load part: two simple current biases joined only at the
    input pins (telescopic stages only)."""
    cbs = store.implementations_of("cb_simple", doping)

    def typer(parts, candidate):
        pins = ("out1", "out2", "source1", "source2", "in1")
        pin_map = {
            "out1": ("s1", "out1"),
            "out2": ("s2", "out1"),
            "source1": ("s1", "source"),
            "source2": ("s2", "source"),
            "in1": ("s1", "in1"),
        }
        return make_type("l_p_cas", 3, pins, 2), pin_map, {"slug": "lp_cas"}

    return ComposerTask(
        name=f"lp_cas_{doping.value}",
        sets=[cbs, [c.renamed(c.name) for c in cbs]],
        characteristic=[conn(0, "in1", 1, "in1")],
        typer=typer,
        doping=doping,
    )


def lp_vb_task(store: ImplementationStore, doping: Doping) -> ComposerTask:
    """Voltage-bias load part: two identical voltage bias implementations
    connected at their sources; the implementation's output must be tied to
    its own input (this is what rules out mixed pairs as voltage bias)."""
    vbs = store.implementations_of("vb_simple", doping) + store.implementations_of(
        "vb_cascode", doping
    )

    def typer(parts, candidate):
        n_t = sum(p.n_transistors() for p in parts)
        pins = ["in1", "in2", "out1", "out2", "source1", "source2"]
        pin_map = {
            "in1": ("s1", "in"),
            "in2": ("s2", "in"),
            "out1": ("s1", "out1"),
            "out2": ("s2", "out1"),
            "source1": ("s1", "source"),
            "source2": ("s2", "source"),
        }
        if n_t == 4:
            pins += ["out1_2", "out2_2", "inner1", "inner2"]
            pin_map.update(
                out1_2=("s1", "out2"),
                out2_2=("s2", "out2"),
                inner1=("s1", "inner"),
                inner2=("s2", "inner"),
            )
        slug = {
            ("vb_dt",): "lp_vb_simple",
            ("vb_vr1",): "lp_vb_vr1",
            ("vb_vr2",): "lp_vb_vr2",
        }.get((parts[0].meta.get("slug"),), "lp_vb_x")
        return make_type("l_p_vb", 3, tuple(pins), n_t), pin_map, {"slug": slug}

    return ComposerTask(
        name=f"lp_vb_{doping.value}",
        sets=[vbs, [v.renamed(v.name) for v in vbs]],
        guards=[guard_same_impl(0, 1)],
        characteristic=[conn(0, "source", 1, "source")],
        rules=[
            Rule.required(
                "self-referenced", PinSel.of(0, "out1"), PinSel.of(0, "in")
            )
        ],
        typer=typer,
        doping=doping,
    )


def build_load_parts(store: ImplementationStore, doping: Doping) -> None:
    emitted: dict = {}
    for task in lp_std_tasks(store, doping):
        for impl in compose(task):
            digest = canonical_digest(impl)
            if digest not in emitted:
                emitted[digest] = impl.with_meta(slug=lp_slug(impl))
    store.put("l_p_st", doping, list(emitted.values()))
    store.put("l_p_cas", doping, compose(lp_cascode_task(store, doping)))
    store.put("l_p_vb", doping, compose(lp_vb_task(store, doping)))


# ---------------------------------------------------------------------------
# Loads
# ---------------------------------------------------------------------------


def load_one_part(lp: BlockInstance) -> BlockInstance:
    pin_map = {pin: ("p1", pin) for pin in lp.pins}
    block_type = make_type("load_1", 3, lp.pins, lp.n_transistors())
    return BlockInstance(
        f"load1_{lp.name}",
        block_type,
        doping=lp.doping,
        children={"p1": lp.renamed("p1")},
        pin_map=pin_map,
        meta={"parts": (lp.meta.get("slug"),), "part_dopings": (lp.doping,)},
    )


def load_two_part(p1: BlockInstance, p2: BlockInstance) -> BlockInstance:
    """Two load parts connected at the load part outputs."""
    pins = ["out1", "out2"]
    pin_map: dict = {"out1": ("p1", "out1"), "out2": ("p1", "out2")}
    for label, part in (("p1", p1), ("p2", p2)):
        for pin in part.pins:
            if pin in ("out1", "out2"):
                continue
            name = f"{pin}_{label}"
            pins.append(name)
            pin_map[name] = (label, pin)
    block_type = make_type(
        "load_2", 3, tuple(pins), p1.n_transistors() + p2.n_transistors()
    )
    return BlockInstance(
        f"load2_{p1.name}_{p2.name}",
        block_type,
        children={"p1": p1.renamed("p1"), "p2": p2.renamed("p2")},
        connections=[
            (("p1", "out1"), ("p2", "out1")),
            (("p1", "out2"), ("p2", "out2")),
        ],
        pin_map=pin_map,
        meta={
            "parts": (p1.meta.get("slug"), p2.meta.get("slug")),
            "part_dopings": (p1.doping, p2.doping),
        },
    )


def lp_by_slugs(
    store: ImplementationStore, doping: Doping, slugs: Iterable[str]
) -> list[BlockInstance]:
    impls = {i.meta.get("slug"): i for i in store.implementations_of("l_p_st", doping)}
    return [impls[s] for s in slugs if s in impls]


# ---------------------------------------------------------------------------
# Transconductances and stage biases
# ---------------------------------------------------------------------------


def _retype_task(
    name: str,
    sets: list[list[BlockInstance]],
    type_name: str,
    level: int,
    rules: Optional[list[Rule]] = None,
    doping: Optional[Doping] = None,
) -> ComposerTask:
    def typer(parts, candidate):
        src = parts[0]
        pin_map = {pin: ("s1", pin) for pin in src.pins}
        block_type = make_type(type_name, level, src.pins, src.n_transistors())
        return block_type, pin_map, {"slug": src.meta.get("slug", src.block_type.name)}

    return ComposerTask(name=name, sets=sets, typer=typer, rules=rules or [], doping=doping)


def build_hl3_blocks(store: ImplementationStore, doping: Doping) -> None:
    """Stage biases, simple/inverting transconductances for one doping."""
    cbs = store.implementations_of("cb_simple", doping) + store.implementations_of(
        "cb_cascode", doping
    )
    store.put("b_s", doping, compose(_retype_task(f"b_s_{doping.value}", [cbs], "b_s", 3, doping=doping)))
    dps = store.implementations_of("dp", doping)

    def tc_typer(parts, candidate):
        pin_map = {pin: ("s1", pin) for pin in parts[0].pins}
        return make_type("tc_s", 3, parts[0].pins, 2), pin_map, {"slug": "tc_s"}

    store.put(
        "tc_s",
        doping,
        compose(ComposerTask(f"tc_s_{doping.value}", [dps], typer=tc_typer, doping=doping)),
    )
    # inverting transconductance: no connection between input and inner pin
    inv_rule = Rule.forbidden(
        "input-apart-from-inner", PinSel.of(0, "in1"), PinSel.of(0, "inner")
    )
    store.put(
        "tc_inv",
        doping,
        compose(
            _retype_task(
                f"tc_inv_{doping.value}", [cbs], "tc_inv", 3, rules=[inv_rule], doping=doping
            )
        ),
    )


def tc_cmfb_task(store: ImplementationStore, doping: Doping) -> ComposerTask:
    """Common-mode feedback transconductance: two same-doping differential
    pairs, one input of each connected (the reference), outputs crossed."""
    dps = store.implementations_of("dp", doping)

    def typer(parts, candidate):
        pins = ("in1", "in2", "ref", "out1", "out2", "source1", "source2")
        pin_map = {
            "in1": ("s1", "in1"),
            "in2": ("s2", "in2"),
            "ref": ("s1", "in2"),
            "out1": ("s1", "out1"),
            "out2": ("s1", "out2"),
            "source1": ("s1", "source"),
            "source2": ("s2", "source"),
        }
        return make_type("tc_cmfb", 3, pins, 4), pin_map, {"slug": "tc_cmfb"}

    return ComposerTask(
        name=f"tc_cmfb_{doping.value}",
        sets=[dps, [d.renamed(d.name) for d in dps]],
        characteristic=[
            conn(0, "in2", 1, "in1"),
            conn(0, "out1", 1, "out2"),
            conn(0, "out2", 1, "out1"),
        ],
        typer=typer,
        doping=doping,
    )


def tc_comp_task(store: ImplementationStore) -> ComposerTask:
    """Complementary transconductance: an n and a p differential pair with
    both inputs connected."""
    dpn = store.implementations_of("dp", Doping.N)
    dpp = store.implementations_of("dp", Doping.P)

    def typer(parts, candidate):
        pins = (
            "in1",
            "in2",
            "out1_n",
            "out2_n",
            "out1_p",
            "out2_p",
            "source_n",
            "source_p",
        )
        pin_map = {
            "in1": ("s1", "in1"),
            "in2": ("s1", "in2"),
            "out1_n": ("s1", "out1"),
            "out2_n": ("s1", "out2"),
            "out1_p": ("s2", "out1"),
            "out2_p": ("s2", "out2"),
            "source_n": ("s1", "source"),
            "source_p": ("s2", "source"),
        }
        return make_type("tc_c", 3, pins, 4), pin_map, {"slug": "tc_c"}

    return ComposerTask(
        name="tc_c",
        sets=[dpn, dpp],
        characteristic=[conn(0, "in1", 1, "in1"), conn(0, "in2", 1, "in2")],
        typer=typer,
    )


def bias_subset(
    store: ImplementationStore, doping: Doping, slugs: Sequence[str]
) -> list[BlockInstance]:
    all_bs = store.implementations_of("b_s", doping)
    return [b for b in all_bs if b.meta.get("slug") in slugs]

# ---------------------------------------------------------------------------
# Amplification stages
# ---------------------------------------------------------------------------

Endpoint = tuple[str, str]


def _stage_pins(
    functional: dict[str, Endpoint], rails: list[tuple[Doping, Endpoint]]
) -> dict[str, Endpoint]:
    pin_map = dict(functional)
    counters = {Doping.P: 0, Doping.N: 0}
    for doping, endpoint in rails:
        counters[doping] += 1
        prefix = "railp" if doping is Doping.P else "railn"
        pin_map[f"{prefix}_{counters[doping]}"] = endpoint
    return pin_map


def _mk_stage(
    name: str,
    type_name: str,
    children: dict[str, BlockInstance],
    connections: list[tuple[Endpoint, Endpoint]],
    functional: dict[str, Endpoint],
    rails: list[tuple[Doping, Endpoint]],
    meta: dict,
    doping: Optional[Doping] = None,
    level: int = 4,
) -> Optional[BlockInstance]:
    """Wire one stage candidate; returns None if it violates the basic
    structural rules."""
    pin_map = _stage_pins(functional, rails)
    block_type = make_type(type_name, level, tuple(pin_map))
    inst = BlockInstance(
        name,
        block_type,
        doping=doping,
        children={k: v.renamed(k) for k, v in children.items()},
        connections=connections,
        pin_map=pin_map,
        meta=meta,
    )
    ok, _ = satisfies_rules(inst, [])
    return inst if ok else None


def _dedup(instances: Iterable[Optional[BlockInstance]]) -> list[BlockInstance]:
    out: dict = {}
    for inst in instances:
        if inst is None:
            continue
        digest = canonical_digest(inst)
        if digest not in out:
            out[digest] = inst
    return [out[d] for d in sorted(out)]


def build_simple_stages(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    """Simple first stage: one-load-part load (two-transistor parts), a
    simple non-inverting transconductance and a stage bias; load doping is
    the complement of the transconductance/bias doping."""
    phi2 = phi1.complement
    tc = store.implementations_of("tc_s", phi1)[0]
    out = []
    for lp in store.implementations_of("l_p_st", phi2):
        if lp.n_transistors() != 2:
            continue
        load = load_one_part(lp)
        for bias in bias_subset(store, phi1, BIAS_INPUT_STAGE):
            functional = {
                "in1": ("tc", "in1"),
                "in2": ("tc", "in2"),
                "out1": ("load", "out1"),
                "out2": ("load", "out2"),
            }
            if lp.meta.get("slug") in LP_ROLES["cmfb_drivable"]:
                functional["cmfb_target"] = ("load", "in1")
            stage = _mk_stage(
                f"a_s_{phi1.value}",
                "a_s",
                {"tc": tc, "bias": bias, "load": load},
                [
                    (("tc", "source"), ("bias", "out1")),
                    (("tc", "out1"), ("load", "out1")),
                    (("tc", "out2"), ("load", "out2")),
                ],
                functional,
                [
                    (phi1, ("bias", "source")),
                    (phi2, ("load", "source1")),
                    (phi2, ("load", "source2")),
                ],
                {
                    "stage_kind": "a_s",
                    "tc_doping": phi1,
                    "bias_slug": bias.meta.get("slug"),
                    "load_parts": (lp.meta.get("slug"),),
                    "load_phi2": lp.meta.get("slug"),
                },
                doping=phi1,
            )
            out.append(stage)
    return _dedup(out)


def build_telescopic_stages(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    """Telescopic first stage: load of a cascode load part (same doping as
    the transconductance, stacked on its outputs) and a four-transistor
    standard load part of the complementary doping."""
    phi2 = phi1.complement
    tc = store.implementations_of("tc_s", phi1)[0]
    cas = store.implementations_of("l_p_cas", phi1)[0]
    out = []
    for std in lp_by_slugs(store, phi2, LP_ROLES["telescopic_phi2"]):
        load = load_two_part(cas, std)
        for bias in bias_subset(store, phi1, BIAS_INPUT_STAGE):
            functional = {
                "in1": ("tc", "in1"),
                "in2": ("tc", "in2"),
                "out1": ("load", "out1"),
                "out2": ("load", "out2"),
            }
            if std.meta.get("slug") in LP_ROLES["cmfb_drivable"]:
                functional["cmfb_target"] = ("load", "in1_p2")
            stage = _mk_stage(
                f"a_tel_{phi1.value}",
                "a_tel",
                {"tc": tc, "bias": bias, "load": load},
                [
                    (("tc", "source"), ("bias", "out1")),
                    (("tc", "out1"), ("load", "source1_p1")),
                    (("tc", "out2"), ("load", "source2_p1")),
                ],
                functional,
                [
                    (phi1, ("bias", "source")),
                    (phi2, ("load", "source1_p2")),
                    (phi2, ("load", "source2_p2")),
                ],
                {
                    "stage_kind": "a_tel",
                    "tc_doping": phi1,
                    "bias_slug": bias.meta.get("slug"),
                    "load_parts": ("lp_cas", std.meta.get("slug")),
                    "load_phi2": std.meta.get("slug"),
                },
                doping=phi1,
            )
            out.append(stage)
    return _dedup(out)


def _fc_load_pairs() -> list[tuple[str, str]]:
    """(phi1 part, phi2 part) slug pairs admitted for folded-cascode loads:
    a mirror-style part over any current-bias quad, or a fully balanced
    quad over a balanced quad."""
    pairs = [
        (m, q)
        for m in LP_ROLES["folded_cascode_phi1"]
        if m in LP_ROLES["mirror"]
        for q in LP_ROLES["quad"]
    ]
    for a in LP_ROLES["folded_cascode_balanced_phi1"]:
        for b in LP_ROLES["folded_cascode_balanced_phi1"]:
            pairs.append((a, b))
    return pairs


def build_folded_cascode_stages(
    store: ImplementationStore, phi1: Doping
) -> list[BlockInstance]:
    """Folded-cascode first stage: two-load-part load whose four-transistor
    current-bias part (complementary doping) receives the transconductance
    outputs on the inner pins of its current biases."""
    phi2 = phi1.complement
    tc = store.implementations_of("tc_s", phi1)[0]
    out = []
    for phi1_slug, phi2_slug in _fc_load_pairs():
        p1 = lp_by_slugs(store, phi2, [phi2_slug])
        p2 = lp_by_slugs(store, phi1, [phi1_slug])
        if not p1 or not p2:
            continue
        load = load_two_part(p1[0], p2[0])
        for bias in bias_subset(store, phi1, BIAS_INPUT_STAGE):
            functional = {
                "in1": ("tc", "in1"),
                "in2": ("tc", "in2"),
                "out1": ("load", "out1"),
                "out2": ("load", "out2"),
            }
            if phi2_slug in LP_ROLES["cmfb_drivable"] and phi1_slug in LP_ROLES["balanced"]:
                functional["cmfb_target"] = ("load", "in1_p1")
            stage = _mk_stage(
                f"a_fc_{phi1.value}",
                "a_fc",
                {"tc": tc, "bias": bias, "load": load},
                [
                    (("tc", "source"), ("bias", "out1")),
                    (("tc", "out1"), ("load", "inner1_p1")),
                    (("tc", "out2"), ("load", "inner2_p1")),
                ],
                functional,
                [
                    (phi1, ("bias", "source")),
                    (phi2, ("load", "source1_p1")),
                    (phi2, ("load", "source2_p1")),
                    (phi1, ("load", "source1_p2")),
                    (phi1, ("load", "source2_p2")),
                ],
                {
                    "stage_kind": "a_fc",
                    "tc_doping": phi1,
                    "bias_slug": bias.meta.get("slug"),
                    "load_parts": (phi1_slug, phi2_slug),
                    "load_phi2": phi2_slug,
                },
                doping=phi1,
            )
            out.append(stage)
    return _dedup(out)


def build_symmetrical_stages(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    """Symmetrical non-inverting stage: voltage-bias load part as load, the
    transconductance outputs connected to the load inputs."""
    phi2 = phi1.complement
    tc = store.implementations_of("tc_s", phi1)[0]
    out = []
    for lp in store.implementations_of("l_p_vb", phi2):
        load = load_one_part(lp)
        for bias in bias_subset(store, phi1, BIAS_INPUT_STAGE):
            functional = {
                "in1": ("tc", "in1"),
                "in2": ("tc", "in2"),
                "out1": ("load", "in1"),
                "out2": ("load", "in2"),
            }
            if "out1_2" in load.pins:
                functional["out1_2"] = ("load", "out1_2")
                functional["out2_2"] = ("load", "out2_2")
            stage = _mk_stage(
                f"a_sym_{phi1.value}",
                "a_sym",
                {"tc": tc, "bias": bias, "load": load},
                [
                    (("tc", "source"), ("bias", "out1")),
                    (("tc", "out1"), ("load", "in1")),
                    (("tc", "out2"), ("load", "in2")),
                ],
                functional,
                [
                    (phi1, ("bias", "source")),
                    (phi2, ("load", "source1")),
                    (phi2, ("load", "source2")),
                ],
                {
                    "stage_kind": "a_sym",
                    "tc_doping": phi1,
                    "bias_slug": bias.meta.get("slug"),
                    "load_parts": (lp.meta.get("slug"),),
                    "load_phi2": lp.meta.get("slug"),
                },
                doping=phi1,
            )
            out.append(stage)
    return _dedup(out)


def build_cmfb_stages(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    """Common-mode feedback stage: CMFB transconductance, a load of two
    simple voltage biases, and two identical stage biases on the two
    transconductance source pins."""
    phi2 = phi1.complement
    tcs = store.implementations_of("tc_cmfb", phi1)
    lps = [
        lp
        for lp in store.implementations_of("l_p_vb", phi2)
        if lp.meta.get("slug") == "lp_vb_simple"
    ]
    out = []
    for tc in tcs:
        for lp in lps:
            load = load_one_part(lp)
            for bias in bias_subset(store, phi1, BIAS_INPUT_STAGE):
                bias2 = bias.renamed("bias2")
                stage = _mk_stage(
                    f"a_cmfb_{phi1.value}",
                    "a_cmfb",
                    {"tc": tc, "load": load, "bias1": bias, "bias2": bias2},
                    [
                        (("tc", "out1"), ("load", "in1")),
                        (("tc", "out2"), ("load", "in2")),
                        (("tc", "source1"), ("bias1", "out1")),
                        (("tc", "source2"), ("bias2", "out1")),
                    ],
                    {
                        "in1": ("tc", "in1"),
                        "in2": ("tc", "in2"),
                        "ref": ("tc", "ref"),
                        "out1": ("load", "in1"),
                    },
                    [
                        (phi1, ("bias1", "source")),
                        (phi1, ("bias2", "source")),
                        (phi2, ("load", "source1")),
                        (phi2, ("load", "source2")),
                    ],
                    {
                        "stage_kind": "a_cmfb",
                        "tc_doping": phi1,
                        "bias_slug": bias.meta.get("slug"),
                        "load_parts": (lp.meta.get("slug"),),
                    },
                    doping=phi1,
                )
                out.append(stage)
    return _dedup(out)


def build_complementary_stages(store: ImplementationStore) -> list[BlockInstance]:
    """Complementary first stage: complementary transconductance, two
    structurally symmetrical stage biases of opposite doping, and an
    eight-transistor two-load-part load taking the transconductance outputs
    on the inner pins of the opposite-doping part."""
    tc = store.implementations_of("tc_c", None)[0]
    out = []
    parts_n = lp_by_slugs(store, Doping.N, LP_ROLES["complementary_parts"])
    parts_p = lp_by_slugs(store, Doping.P, LP_ROLES["complementary_parts"])
    biases_n = bias_subset(store, Doping.N, BIAS_OUTPUT_STAGE)
    biases_p = bias_subset(store, Doping.P, BIAS_OUTPUT_STAGE)
    for bias_n, bias_p in itertools.product(biases_n, biases_p):
        if not guard_sym(0, 1)([bias_n, bias_p]):
            continue
        for lp_n, lp_p in itertools.product(parts_n, parts_p):
            load = load_two_part(lp_n, lp_p)
            stage = _mk_stage(
                "a_c",
                "a_c",
                {"tc": tc, "bias_n": bias_n, "bias_p": bias_p, "load": load},
                [
                    (("tc", "source_n"), ("bias_n", "out1")),
                    (("tc", "source_p"), ("bias_p", "out1")),
                    (("tc", "out1_n"), ("load", "inner1_p2")),
                    (("tc", "out2_n"), ("load", "inner2_p2")),
                    (("tc", "out1_p"), ("load", "inner1_p1")),
                    (("tc", "out2_p"), ("load", "inner2_p1")),
                ],
                {
                    "in1": ("tc", "in1"),
                    "in2": ("tc", "in2"),
                    "out1": ("load", "out1"),
                    "out2": ("load", "out2"),
                },
                [
                    (Doping.N, ("bias_n", "source")),
                    (Doping.P, ("bias_p", "source")),
                    (Doping.N, ("load", "source1_p1")),
                    (Doping.N, ("load", "source2_p1")),
                    (Doping.P, ("load", "source1_p2")),
                    (Doping.P, ("load", "source2_p2")),
                ],
                {
                    "stage_kind": "a_c",
                    "bias_slug": bias_n.meta.get("slug"),
                    "load_parts": (lp_n.meta.get("slug"), lp_p.meta.get("slug")),
                },
            )
            out.append(stage)
    return _dedup(out)


def build_inverting_stages(store: ImplementationStore, phi: Doping) -> list[BlockInstance]:
    """Second (inverting) stage: inverting transconductance plus a stage
    bias of the other doping, connected at their outputs."""
    out = []
    for tc in store.implementations_of("tc_inv", phi):
        for bias in bias_subset(store, phi.complement, BIAS_OUTPUT_STAGE):
            functional = {"in_tc1": ("tc", "in1"), "out": ("tc", "out1")}
            if "in2" in tc.pins:
                functional["in_tc2"] = ("tc", "in2")
            if "in2" in bias.pins:
                functional["in_bs2"] = ("bias", "in2")
            functional["in_bs1"] = ("bias", "in1")
            stage = _mk_stage(
                f"a_inv_{phi.value}",
                "a_inv",
                {"tc": tc, "bias": bias},
                [(("tc", "out1"), ("bias", "out1"))],
                functional,
                [(phi, ("tc", "source")), (phi.complement, ("bias", "source"))],
                {
                    "stage_kind": "a_inv",
                    "tc_doping": phi,
                    "tc_slug": tc.meta.get("slug"),
                    "bias_slug": bias.meta.get("slug"),
                },
                doping=phi,
            )
            out.append(stage)
    return _dedup(out)


def build_inverting_vb_stages(store: ImplementationStore, phi: Doping) -> list[BlockInstance]:
    """Inverting stage with a voltage bias as stage bias (the diode-side
    output branch of symmetrical op-amps)."""
    vbs = store.implementations_of("vb_simple", phi.complement) + store.implementations_of(
        "vb_cascode", phi.complement
    )
    out = []
    for tc in store.implementations_of("tc_inv", phi):
        for vb in vbs:
            functional = {"in_tc1": ("tc", "in1"), "out": ("tc", "out1")}
            if "in2" in tc.pins:
                functional["in_tc2"] = ("tc", "in2")
            functional["out_bs1"] = ("vb", "out1")
            if "out2" in vb.pins:
                functional["out_bs2"] = ("vb", "out2")
            stage = _mk_stage(
                f"a_inv_vb_{phi.value}",
                "a_inv_vb",
                {"tc": tc, "vb": vb},
                [(("tc", "out1"), ("vb", "in"))],
                functional,
                [(phi, ("tc", "source")), (phi.complement, ("vb", "source"))],
                {
                    "stage_kind": "a_inv_vb",
                    "tc_doping": phi,
                    "tc_slug": tc.meta.get("slug"),
                    "bias_slug": vb.meta.get("slug"),
                },
                doping=phi,
            )
            out.append(stage)
    return _dedup(out)

# ---------------------------------------------------------------------------
# Op-amp assembly (cores without bias)
# ---------------------------------------------------------------------------


def _rail_endpoints(children: dict[str, BlockInstance]):
    railp: list[Endpoint] = []
    railn: list[Endpoint] = []
    for cname in children:
        for pin in children[cname].pins:
            if pin.startswith("railp_"):
                railp.append((cname, pin))
            elif pin.startswith("railn_"):
                railn.append((cname, pin))
    if not railp or not railn:
        raise NetlistError("op-amp assembly requires both supply rails")
    chains = [(railp[0], e) for e in railp[1:]] + [(railn[0], e) for e in railn[1:]]
    return railp[0], railn[0], chains


def _mk_opamp(
    kind: str,
    children: dict[str, BlockInstance],
    connections: list[tuple[Endpoint, Endpoint]],
    functional: dict[str, Endpoint],
    meta: dict,
) -> Optional[BlockInstance]:
    vdd, vss, chains = _rail_endpoints(children)
    pin_map = dict(functional)
    pin_map["vdd"] = vdd
    pin_map["vss"] = vss
    block_type = make_type(kind, 5, tuple(pin_map))
    inst = BlockInstance(
        kind,
        block_type,
        children={k: v.renamed(k) for k, v in children.items()},
        connections=connections + chains,
        pin_map=pin_map,
        meta=dict(meta, kind=kind),
    )
    ok, _ = satisfies_rules(inst, [])
    return inst if ok else None


def _stage_filter(stages, pred) -> list[BlockInstance]:
    return [s for s in stages if pred(s.meta)]


def _so_valid(meta: dict) -> bool:
    """Single-ended output needs a mirror part opposite the output branch."""
    kind = meta["stage_kind"]
    parts = meta["load_parts"]
    if kind == "a_s":
        return parts[0] in LP_ROLES["mirror"]
    if kind == "a_tel":
        return parts[1] in LP_ROLES["mirror"]
    if kind == "a_fc":
        return parts[0] in LP_ROLES["mirror"]
    return False


def _fd_valid(stage: BlockInstance) -> bool:
    """Fully-differential bases need a drivable, fully balanced load."""
    meta = stage.meta
    if "cmfb_target" not in stage.pins:
        return False
    return all(
        p in LP_ROLES["balanced"] or p == "lp_cas" for p in meta["load_parts"]
    )


def first_stages(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    return (
        store.implementations_of("a_s", phi1)
        + store.implementations_of("a_tel", phi1)
        + store.implementations_of("a_fc", phi1)
    )


def assemble_so_one_stage(store: ImplementationStore) -> list[BlockInstance]:
    out = []
    for phi1 in (Doping.N, Doping.P):
        for stage in first_stages(store, phi1):
            if not _so_valid(stage.meta):
                continue
            op = _mk_opamp(
                "op_so_1",
                {"a1": stage},
                [],
                {"in_p": ("a1", "in1"), "in_n": ("a1", "in2"), "out": ("a1", "out2")},
                {"stages": 1, "first_stage": dict(stage.meta)},
            )
            out.append(op)
    return _dedup(out)


def assemble_so_two_stage(
    store: ImplementationStore, base: BlockInstance
) -> list[BlockInstance]:
    """Add a second stage and a compensation capacitor to the first stage
    of a one-stage op-amp: capacitor between the stage outputs, first-stage
    output into the inverting transconductance input."""
    stage = base.children["a1"]
    phi2 = stage.meta["tc_doping"].complement
    cap = capacitor()
    out = []
    for inv in store.implementations_of("a_inv", phi2):
        op = _mk_opamp(
            "op_so_2",
            {"a1": stage, "c1": cap, "a2": inv},
            [
                (("a1", "out2"), ("c1", "plus")),
                (("c1", "minus"), ("a2", "out")),
                (("a1", "out2"), ("a2", "in_tc1")),
            ],
            {"in_p": ("a1", "in1"), "in_n": ("a1", "in2"), "out": ("a2", "out")},
            {
                "stages": 2,
                "first_stage": dict(stage.meta),
                "second_stage": dict(inv.meta),
                "parent": canonical_digest(base).hex(),
            },
        )
        out.append(op)
    return _dedup(out)


def _mirror_pair_digests(store: ImplementationStore, phi: Doping) -> set:
    """Digests of the mirror-class standard load parts of one doping."""
    return {
        canonical_digest(lp)
        for lp in store.implementations_of("l_p_st", phi)
        if lp.meta.get("slug") in LP_ROLES["mirror"]
    }


def _forms_current_mirror(
    store: ImplementationStore, vb: BlockInstance, cb: BlockInstance
) -> bool:
    """Current-mirror rule for the symmetrical stage-bias pair: wired the
    way the op-amp wires them (sources on one rail, outputs to inputs), the
    pair must flatten into one of the recognized mirror load parts."""
    connections = [(("s1", "source"), ("s2", "source")), (("s1", "out1"), ("s2", "in1"))]
    if "out2" in vb.pins and "in2" in cb.pins:
        connections.append((("s1", "out2"), ("s2", "in2")))
    probe = BlockInstance(
        "mirror_probe",
        make_type("_mirror_probe", 3, ()),
        children={"s1": vb.renamed("s1"), "s2": cb.renamed("s2")},
        connections=connections,
        pin_map={},
    )
    return canonical_digest(probe) in _mirror_pair_digests(store, vb.doping)


def assemble_so_symmetrical(store: ImplementationStore) -> list[BlockInstance]:
    """Symmetrical op-amp: a symmetrical non-inverting stage plus an
    inverting stage and a voltage-bias-loaded inverting stage on its two
    outputs; the two stage biases form a current mirror."""
    out = []
    for phi1 in (Doping.N, Doping.P):
        phi2 = phi1.complement
        bases = [
            s
            for s in store.implementations_of("a_sym", phi1)
            if s.meta["load_parts"][0] in SYM_ASSEMBLY_LOADS
        ]
        invs = store.implementations_of("a_inv", phi2)
        inv_vbs = store.implementations_of("a_inv_vb", phi2)
        for base, inv, inv_vb in itertools.product(bases, invs, inv_vbs):
            if inv.child("tc").n_transistors() != inv_vb.child("tc").n_transistors():
                continue
            n_load = base.child("load").n_transistors()
            if n_load > inv.child("tc").n_transistors() + inv_vb.child("tc").n_transistors():
                continue
            if inv.child("bias").n_transistors() < inv_vb.child("vb").n_transistors():
                continue
            if not _forms_current_mirror(store, inv_vb.child("vb"), inv.child("bias")):
                continue
            connections = [
                (("a1", "out1"), ("a3", "in_tc1")),
                (("a1", "out2"), ("a2", "in_tc1")),
                (("a2", "in_bs1"), ("a3", "out_bs1")),
            ]
            if "in_bs2" in inv.pins and "out_bs2" in inv_vb.pins:
                connections.append((("a2", "in_bs2"), ("a3", "out_bs2")))
            # the free cascode gates of the two output branches share one
            # bias net; internally tied transconductances have no free gate
            if inv.meta["tc_slug"] == "cb_cas" and inv_vb.meta["tc_slug"] == "cb_cas":
                connections.append((("a2", "in_tc2"), ("a3", "in_tc2")))
            op = _mk_opamp(
                "op_so_sym",
                {"a1": base, "a2": inv, "a3": inv_vb},
                connections,
                {"in_p": ("a1", "in1"), "in_n": ("a1", "in2"), "out": ("a2", "out")},
                {
                    "stages": 2,
                    "symmetrical": True,
                    "first_stage": dict(base.meta),
                    "second_stage": dict(inv.meta),
                },
            )
            out.append(op)
    return _dedup(out)


def fd_bases(store: ImplementationStore, phi1: Doping) -> list[BlockInstance]:
    return [s for s in first_stages(store, phi1) if _fd_valid(s)]


def assemble_fd_one_stage(store: ImplementationStore) -> list[BlockInstance]:
    """Fully-differential one-stage op-amp: first stage plus common-mode
    feedback stage; the feedback output drives the gates of the rail
    transistors of the first stage's complementary-doping load part."""
    out = []
    for phi1 in (Doping.N, Doping.P):
        for stage, cmfb in itertools.product(
            fd_bases(store, phi1), store.implementations_of("a_cmfb", phi1)
        ):
            op = _mk_opamp(
                "op_fd_1",
                {"a1": stage, "fb": cmfb},
                [
                    (("a1", "out1"), ("fb", "in1")),
                    (("a1", "out2"), ("fb", "in2")),
                    (("a1", "cmfb_target"), ("fb", "out1")),
                ],
                {
                    "in_p": ("a1", "in1"),
                    "in_n": ("a1", "in2"),
                    "out_p": ("a1", "out1"),
                    "out_n": ("a1", "out2"),
                    "v_cm_ref": ("fb", "ref"),
                },
                {"stages": 1, "first_stage": dict(stage.meta), "cmfb": dict(cmfb.meta)},
            )
            out.append(op)
    return _dedup(out)


def assemble_fd_two_stage(
    store: ImplementationStore, base: BlockInstance
) -> list[BlockInstance]:
    """Add two identical inverting stages and two compensation capacitors
    to a fully-differential base; the feedback stage then senses the
    inverting-stage outputs."""
    stage = base.children["a1"]
    cmfb = base.children["fb"]
    phi2 = stage.meta["tc_doping"].complement
    cap = capacitor()
    out = []
    for inv in store.implementations_of("a_inv", phi2):
        inv2 = inv.renamed("a3")
        op = _mk_opamp(
            "op_fd_2",
            {"a1": stage, "c1": cap, "c2": cap.renamed("c2"), "a2": inv, "a3": inv2, "fb": cmfb},
            [
                (("a1", "out1"), ("c1", "plus")),
                (("a1", "out2"), ("c2", "plus")),
                (("a1", "out1"), ("a2", "in_tc1")),
                (("a1", "out2"), ("a3", "in_tc1")),
                (("c1", "minus"), ("a2", "out")),
                (("c2", "minus"), ("a3", "out")),
                (("a2", "out"), ("fb", "in1")),
                (("a3", "out"), ("fb", "in2")),
                (("a1", "cmfb_target"), ("fb", "out1")),
            ],
            {
                "in_p": ("a1", "in1"),
                "in_n": ("a1", "in2"),
                "out_p": ("a2", "out"),
                "out_n": ("a3", "out"),
                "v_cm_ref": ("fb", "ref"),
            },
            {
                "stages": 2,
                "first_stage": dict(stage.meta),
                "second_stage": dict(inv.meta),
                "cmfb": dict(cmfb.meta),
                "parent": canonical_digest(base).hex(),
            },
        )
        out.append(op)
    return _dedup(out)


def assemble_complementary(store: ImplementationStore) -> list[BlockInstance]:
    out = []
    for stage in store.implementations_of("a_c", None):
        op = _mk_opamp(
            "op_comp",
            {"a1": stage},
            [],
            {"in_p": ("a1", "in1"), "in_n": ("a1", "in2"), "out": ("a1", "out2")},
            {"stages": 1, "first_stage": dict(stage.meta)},
        )
        out.append(op)
    return _dedup(out)


# ---------------------------------------------------------------------------
# Library build and plans
# ---------------------------------------------------------------------------


def build_block_library(include_diode_in_cascode_cb: bool = True) -> ImplementationStore:
    """Build all basic and op-amp-type-specific blocks upfront; register
    the large block families (load parts are built eagerly, first stages
    and op-amps fill on demand)."""
    store = build_basic_library(include_diode_in_cascode_cb)
    for doping in (Doping.N, Doping.P):
        build_load_parts(store, doping)
        build_hl3_blocks(store, doping)
        store.put("tc_cmfb", doping, compose(tc_cmfb_task(store, doping)))
    store.put("tc_c", None, compose(tc_comp_task(store)))
    store.register_on_demand("a_s", lambda s, d: build_simple_stages(s, d))
    store.register_on_demand("a_tel", lambda s, d: build_telescopic_stages(s, d))
    store.register_on_demand("a_fc", lambda s, d: build_folded_cascode_stages(s, d))
    store.register_on_demand("a_sym", lambda s, d: build_symmetrical_stages(s, d))
    store.register_on_demand("a_cmfb", lambda s, d: build_cmfb_stages(s, d))
    store.register_on_demand("a_c", lambda s, d: build_complementary_stages(s))
    store.register_on_demand("a_inv", lambda s, d: build_inverting_stages(s, d))
    store.register_on_demand("a_inv_vb", lambda s, d: build_inverting_vb_stages(s, d))
    store.register_on_demand("load_1", _fill_load_1)
    store.register_on_demand("load_2", _fill_load_2)
    return store


def _fill_load_1(store: ImplementationStore, doping: Doping) -> list[BlockInstance]:
    return _dedup(
        load_one_part(lp) for lp in store.implementations_of("l_p_st", doping)
    )


def _fill_load_2(store: ImplementationStore, doping: Doping) -> list[BlockInstance]:
    """Two-load-part loads with this doping on the first part: the pairs
    reachable from the telescopic and folded-cascode plans."""
    phi2 = doping
    phi1 = doping.complement
    out = []
    cas = store.implementations_of("l_p_cas", phi1)[0]
    for std in lp_by_slugs(store, phi2, LP_ROLES["telescopic_phi2"]):
        out.append(load_two_part(cas, std))
    for phi1_slug, phi2_slug in _fc_load_pairs():
        p1 = lp_by_slugs(store, phi2, [phi2_slug])
        p2 = lp_by_slugs(store, phi1, [phi1_slug])
        if p1 and p2:
            out.append(load_two_part(p1[0], p2[0]))
    return _dedup(out)


@dataclass
class CompositionPlan:
    """Ordered build plan for one op-amp type; bias synthesis is always the
    final step of each topology."""

    op_type: str
    upfront: tuple[str, ...]
    one_stage: Callable[[ImplementationStore], list[BlockInstance]]
    two_stage: Optional[Callable[[ImplementationStore, BlockInstance], list[BlockInstance]]]
    extra: Optional[Callable[[ImplementationStore], list[BlockInstance]]] = None
    bias_last: bool = True


def plan_for(op_type: str) -> CompositionPlan:
    common = ("l_p_st", "l_p_cas", "l_p_vb", "b_s", "tc_s", "tc_inv")
    if op_type == OpAmpType.SINGLE_OUTPUT:
        return CompositionPlan(
            op_type,
            common,
            assemble_so_one_stage,
            assemble_so_two_stage,
            extra=assemble_so_symmetrical,
        )
    if op_type == OpAmpType.FULLY_DIFFERENTIAL:
        return CompositionPlan(
            op_type, common + ("tc_cmfb",), assemble_fd_one_stage, assemble_fd_two_stage
        )
    if op_type == OpAmpType.COMPLEMENTARY:
        return CompositionPlan(op_type, common + ("tc_c",), assemble_complementary, None)
    raise ValueError(f"unsupported op-amp type {op_type!r}")


def count_supported(store: ImplementationStore, op_type: str) -> dict[str, int]:
    """Structure-only enumeration counts for one op-amp type."""
    plan = plan_for(op_type)
    ones = plan.one_stage(store)
    counts = {"one_stage": len(ones)}
    if plan.two_stage is not None:
        counts["two_stage"] = sum(len(plan.two_stage(store, base)) for base in ones)
    if plan.extra is not None:
        counts["symmetrical"] = len(plan.extra(store))
    counts["total"] = sum(v for k, v in counts.items() if k != "total")
    return counts


def enumerate_hl3(store: ImplementationStore) -> dict[str, int]:
    """Totals over both dopings for the HL3 families."""
    totals: dict[str, int] = {}
    for family in ("l_p_st", "l_p_cas", "l_p_vb", "b_s", "tc_s", "tc_inv", "tc_cmfb"):
        totals[family] = sum(
            len(store.implementations_of(family, d)) for d in (Doping.N, Doping.P)
        )
    totals["tc_c"] = len(store.implementations_of("tc_c", None))
    return totals


def enumerate_first_stages(store: ImplementationStore) -> dict[str, int]:
    totals: dict[str, int] = {}
    for family in ("a_s", "a_tel", "a_fc", "a_sym", "a_cmfb"):
        totals[family] = sum(
            len(store.implementations_of(family, d)) for d in (Doping.N, Doping.P)
        )
    totals["a_c"] = len(store.implementations_of("a_c", None))
    totals["first_stages_total"] = sum(
        totals[k] for k in ("a_s", "a_tel", "a_fc", "a_sym", "a_cmfb", "a_c")
    )
    return totals
