"""Canonical identity for flattened netlists.

Two instances are the same implementation iff their flattened colored
graphs are isomorphic. Colors: device kind + doping on device nodes, net
role on net nodes; edges carry the device pin name (gate/drain/source,
plus/minus). Hierarchy is ignored on purpose: two composition paths that
reach the same transistor graph must deduplicate.

Canonical labeling is color refinement plus individualization on ties,
which is exact (not just a hash) at the sizes that occur here (< 50 nodes).
"""

from __future__ import annotations

import hashlib
from typing import Optional

from .netlist import BlockInstance, Doping, FlatNetlist, flatten


class CanonicalDigest(bytes):
    """Fixed-length digest, equal iff flattened graphs are isomorphic."""

    def short(self) -> str:
        return self.hex()[:12]


def _graph(flat: FlatNetlist, swap_doping: bool) -> tuple[list, list, list]:
    """Build (node colors, adjacency, edge labels) for the bipartite graph."""
    n_dev = len(flat.devices)
    colors: list[tuple] = []
    for dev in flat.devices:
        doping = dev.doping
        if doping is not None and swap_doping:
            doping = doping.complement
        colors.append(("dev", dev.kind.value, doping.value if doping else "-"))
    for i in range(len(flat.nets)):
        colors.append(("net", flat.role(i).value))

    from .netlist import PinId

    net_of = flat.net_of
    adj: list[list[tuple[str, int]]] = [[] for _ in range(n_dev + len(flat.nets))]
    for di, dev in enumerate(flat.devices):
        for pin in dev.pins:
            ni = n_dev + net_of[PinId(dev.path, pin)]
            adj[di].append((pin, ni))
            adj[ni].append((pin, di))
    return colors, adj, []


def _refine(colors: list[int], adj) -> list[int]:
    """Iterative color refinement until the partition is stable."""
    while True:
        signatures = []
        for i, neigh in enumerate(adj):
            sig = (colors[i], tuple(sorted((lbl, colors[j]) for lbl, j in neigh)))
            signatures.append(sig)
        order = {sig: k for k, sig in enumerate(sorted(set(signatures)))}
        new = [order[sig] for sig in signatures]
        if new == colors:
            return new
        colors = new


def _certificate(colors: list[int], adj) -> bytes:
    """Canonical certificate via refinement + individualization backtracking."""
    colors = _refine(colors, adj)
    # find smallest non-singleton color class
    by_color: dict[int, list[int]] = {}
    for i, c in enumerate(colors):
        by_color.setdefault(c, []).append(i)
    ambiguous = [c for c, members in sorted(by_color.items()) if len(members) > 1]
    if not ambiguous:
        # discrete: serialize by color order
        perm = sorted(range(len(colors)), key=lambda i: colors[i])
        pos = {node: k for k, node in enumerate(perm)}
        edges = sorted(
            (min(pos[i], pos[j]), max(pos[i], pos[j]), lbl)
            for i, neigh in enumerate(adj)
            for lbl, j in neigh
        )
        return repr((len(colors), edges)).encode()
    target = ambiguous[0]
    best: Optional[bytes] = None
    for node in by_color[target]:
        branched = list(colors)
        branched[node] = max(colors) + 1
        cert = _certificate(branched, adj)
        if best is None or cert < best:
            best = cert
    return best


def canonical_digest(
    block: BlockInstance, *, swap_doping: bool = False
) -> CanonicalDigest:
    """Digest of the flattened colored graph.

    Invariant under child reordering and net renumbering; ``swap_doping``
    digests the complementary-doping twin (N<->P swapped on every device).
    """
    attr = "_digest_swap" if swap_doping else "_digest"
    cached = getattr(block, attr)
    if cached is not None:
        return cached
    digest = digest_flat(flatten(block), swap_doping=swap_doping)
    setattr(block, attr, digest)
    return digest


def digest_flat(flat: FlatNetlist, *, swap_doping: bool = False) -> CanonicalDigest:
    base_colors, adj, _ = _graph(flat, swap_doping)
    order = {c: k for k, c in enumerate(sorted(set(base_colors)))}
    cert = _certificate([order[c] for c in base_colors], adj)
    # initial color classes are part of identity (kind/doping/role counts)
    header = repr(sorted(base_colors)).encode()
    return CanonicalDigest(hashlib.sha256(header + cert).digest())


def is_isomorphic_bruteforce(a: FlatNetlist, b: FlatNetlist) -> bool:
    """Exact isomorphism check by backtracking search over device mappings.

    Independent oracle for the digest; feasible for the small graphs used
    in tests (<= 6 devices).
    """
    from .netlist import PinId

    if len(a.devices) != len(b.devices) or len(a.nets) != len(b.nets):
        return False

    def dev_color(flat, d):
        return (d.kind, d.doping)

    a_by_color: dict = {}
    b_by_color: dict = {}
    for d in a.devices:
        a_by_color.setdefault(dev_color(a, d), []).append(d)
    for d in b.devices:
        b_by_color.setdefault(dev_color(b, d), []).append(d)
    if {k: len(v) for k, v in a_by_color.items()} != {
        k: len(v) for k, v in b_by_color.items()
    }:
        return False

    a_net_of, b_net_of = a.net_of, b.net_of
    a_devs = list(a.devices)

    def net_sig(flat, net_of, dev, pin):
        return net_of[PinId(dev.path, pin)]

    def backtrack(i: int, dev_map: dict, net_map: dict, used: set) -> bool:
        if i == len(a_devs):
            return True
        da = a_devs[i]
        for db in b.devices:
            if db in used or dev_color(a, da) != dev_color(b, db):
                continue
            trial = dict(net_map)
            ok = True
            for pin in da.pins:
                na, nb = net_sig(a, a_net_of, da, pin), net_sig(b, b_net_of, db, pin)
                if a.role(na) != b.role(nb):
                    ok = False
                    break
                if trial.get(na, nb) != nb or nb in {
                    v for k, v in trial.items() if k != na
                }:
                    ok = False
                    break
                trial[na] = nb
            if not ok:
                continue
            # net sizes must match
            if any(len(a.nets[k]) != len(b.nets[v]) for k, v in trial.items()):
                continue
            used.add(db)
            if backtrack(i + 1, dev_map, trial, used):
                return True
            used.discard(db)
        return False

    return backtrack(0, {}, {}, set())
