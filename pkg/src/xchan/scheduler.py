"""Greedy grouping of a topology sequence into coding opportunities.

Works offline over the whole sequence: first pair z1 with z2 and z3 with
z4 (opportunity 1), then, if the leftover z instances have matching
orientation, absorb them together with f slots into triples
(opportunity 2).  Everything else is coded solo.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence, Union

from .channel import Topology

PAIR12 = "pair12"        # {z1, z2}
PAIR34 = "pair34"        # {z3, z4}
TRIPLE24F = "triple24f"  # {z2, z4, f}
TRIPLE13F = "triple13f"  # {z1, z3, f}
SOLO = "solo"


@dataclass(frozen=True)
class PairGroup:
    kind: str                # PAIR12 or PAIR34
    slots: tuple[int, int]   # (z1-slot, z2-slot) resp. (z3-slot, z4-slot)
    symbols: int = 3


@dataclass(frozen=True)
class TripleGroup:
    kind: str                     # TRIPLE24F or TRIPLE13F
    slots: tuple[int, int, int]   # (z2, z4, f) resp. (z1, z3, f)
    symbols: int = 4


@dataclass(frozen=True)
class SoloGroup:
    slot: int
    topology: Topology
    kind: str = SOLO

    @property
    def slots(self) -> tuple[int]:
        return (self.slot,)

    @property
    def symbols(self) -> int:
        # interference-free topologies carry two parallel streams
        return 2 if self.topology in (Topology.I1, Topology.I2) else 1


Group = Union[PairGroup, TripleGroup, SoloGroup]


@dataclass(frozen=True)
class SchedulePlan:
    groups: tuple[Group, ...]
    n_slots: int


@dataclass(frozen=True)
class ScheduleReport:
    symbols_delivered: int
    slots: int
    empirical_dof: float
    counts: dict[str, int]   # groups per kind
    theta: float             # fraction of slots consumed by triples / 3


def plan(seq: Sequence[Topology]) -> SchedulePlan:
    """Partition the slots of ``seq`` into pairs, triples and solos.

    Pairing is earliest-unconsumed-first within each topology.  Triples are
    formed only when the surplus after pairing is {z2, z4} (with f) or
    {z1, z3} (with f); mixed surpluses get no triples.
    """
    idx: dict[Topology, list[int]] = {a: [] for a in Topology}
    for slot, a in enumerate(seq):
        if not isinstance(a, Topology):
            raise TypeError(f"sequence entries must be Topology, got {a!r}")
        idx[a].append(slot)

    z1, z2, z3, z4, fs = (idx[a] for a in
                          (Topology.Z1, Topology.Z2, Topology.Z3, Topology.Z4, Topology.F))
    groups: list[Group] = []
    consumed = set()

    n12 = min(len(z1), len(z2))
    for k in range(n12):
        groups.append(PairGroup(PAIR12, (z1[k], z2[k])))
        consumed.update((z1[k], z2[k]))
    n34 = min(len(z3), len(z4))
    for k in range(n34):
        groups.append(PairGroup(PAIR34, (z3[k], z4[k])))
        consumed.update((z3[k], z4[k]))

    sur2, sur4 = len(z2) - n12, len(z4) - n34
    sur1, sur3 = len(z1) - n12, len(z3) - n34
    if sur2 > 0 and sur4 > 0:
        t = min(sur2, sur4, len(fs))
        for k in range(t):
            slots = (z2[n12 + k], z4[n34 + k], fs[k])
            groups.append(TripleGroup(TRIPLE24F, slots))
            consumed.update(slots)
    elif sur1 > 0 and sur3 > 0:
        t = min(sur1, sur3, len(fs))
        for k in range(t):
            slots = (z1[n12 + k], z3[n34 + k], fs[k])
            groups.append(TripleGroup(TRIPLE13F, slots))
            consumed.update(slots)
    # mixed surpluses (z2 with z3, or z1 with z4) never combine

    for slot, a in enumerate(seq):
        if slot not in consumed:
            groups.append(SoloGroup(slot, a))

    groups.sort(key=lambda g: g.slots[0])
    return SchedulePlan(tuple(groups), n_slots=len(seq))


def report(p: SchedulePlan) -> ScheduleReport:
    """Symbol accounting of a plan: 3 per pair, 4 per triple, 1 or 2 per solo."""
    counts = Counter(g.kind for g in p.groups)
    symbols = sum(g.symbols for g in p.groups)
    n_triples = counts[TRIPLE24F] + counts[TRIPLE13F]
    return ScheduleReport(
        symbols_delivered=symbols,
        slots=p.n_slots,
        empirical_dof=symbols / p.n_slots,
        counts=dict(counts),
        theta=n_triples / p.n_slots,
    )


def load_sequence(path) -> list[Topology]:
    """Read a sequence file: one topology name per line, '#' comments allowed."""
    seq = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            name = line.split("#", 1)[0].strip()
            if not name:
                continue
            try:
                seq.append(Topology(name))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: unknown topology name {name!r}") from None
    if not seq:
        raise ValueError(f"{path}: empty topology sequence")
    return seq
