"""Structural synthesis of CMOS operational amplifiers.

Composes op-amp netlists from a hierarchical library of functional blocks,
generates their bias networks, evaluates candidates with first-order
behavioral equations under a two-phase specification gate, and emits all
topologies that satisfy a user specification.
"""

from .netlist import (
    BlockInstance,
    BlockType,
    DeviceKind,
    Doping,
    FlatNetlist,
    NetRole,
    NetlistError,
    PinId,
    connect,
    flatten,
)
from .digest import CanonicalDigest, canonical_digest
from .library import ImplementationStore, build_basic_library, device_prototypes

__all__ = [
    "BlockInstance",
    "BlockType",
    "CanonicalDigest",
    "DeviceKind",
    "Doping",
    "FlatNetlist",
    "ImplementationStore",
    "NetRole",
    "NetlistError",
    "PinId",
    "build_basic_library",
    "canonical_digest",
    "connect",
    "device_prototypes",
    "flatten",
]
