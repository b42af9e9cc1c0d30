"""Topology alphabet, topology mixes, fading models and random sampling.

The network is a 2x2 X-channel: two transmitters, two receivers, and a
connectivity vector c = (c11, c12, c21, c22) where c_ji = 1 iff the link
from transmitter i to receiver j is up.  The 15 nonzero vectors form the
topology alphabet.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # py3.10
    import tomli as tomllib

SUM_TOL = 1e-12


class Topology(enum.Enum):
    """The 15 admissible connectivity patterns of the 2x2 X-channel."""

    S1 = "s1"  # single link Tx1 -> Rx1
    S2 = "s2"  # single link Tx1 -> Rx2
    S3 = "s3"  # single link Tx2 -> Rx2
    S4 = "s4"  # single link Tx2 -> Rx1
    M1 = "m1"  # multiple access into Rx1
    M2 = "m2"  # multiple access into Rx2
    B1 = "b1"  # broadcast from Tx1
    B2 = "b2"  # broadcast from Tx2
    Z1 = "z1"  # three links, c21 missing (Rx2 hears only Tx2)
    Z2 = "z2"  # three links, c11 missing (Rx1 hears only Tx2)
    Z3 = "z3"  # three links, c12 missing (Rx1 hears only Tx1)
    Z4 = "z4"  # three links, c22 missing (Rx2 hears only Tx1)
    I1 = "i1"  # parallel interference-free links Tx1->Rx1, Tx2->Rx2
    I2 = "i2"  # crossed interference-free links Tx2->Rx1, Tx1->Rx2
    F = "f"    # fully connected

    @property
    def links(self) -> tuple[int, int, int, int]:
        """Connectivity vector (c11, c12, c21, c22)."""
        return _LINKS[self]

    @property
    def link_count(self) -> int:
        return sum(_LINKS[self])

    def __str__(self) -> str:
        return self.value


_LINKS: dict[Topology, tuple[int, int, int, int]] = {
    Topology.S1: (1, 0, 0, 0),
    Topology.S4: (0, 1, 0, 0),
    Topology.S2: (0, 0, 1, 0),
    Topology.S3: (0, 0, 0, 1),
    Topology.M1: (1, 1, 0, 0),
    Topology.M2: (0, 0, 1, 1),
    Topology.B1: (1, 0, 1, 0),
    Topology.B2: (0, 1, 0, 1),
    Topology.Z1: (1, 1, 0, 1),
    Topology.Z2: (0, 1, 1, 1),
    Topology.Z3: (1, 0, 1, 1),
    Topology.Z4: (1, 1, 1, 0),
    Topology.I1: (1, 0, 0, 1),
    Topology.I2: (0, 1, 1, 0),
    Topology.F: (1, 1, 1, 1),
}

_BY_LINKS = {v: k for k, v in _LINKS.items()}

ALPHABET: tuple[Topology, ...] = tuple(Topology)


def topology_links(a: Topology) -> tuple[int, int, int, int]:
    """Connectivity vector (c11, c12, c21, c22) of topology ``a``."""
    return a.links


def topology_from_links(links: Iterable[int]) -> Topology:
    """Inverse of :func:`topology_links`; rejects the all-zero vector."""
    key = tuple(int(bool(b)) for b in links)
    if len(key) != 4:
        raise ValueError(f"connectivity vector must have 4 entries, got {key}")
    if key == (0, 0, 0, 0):
        raise ValueError("the all-zero connectivity vector is not a topology")
    return _BY_LINKS[key]


class MixValidationError(ValueError):
    """A topology mix violates nonnegativity or normalization."""


@dataclass(frozen=True)
class TopologyMix:
    """Time fractions lambda_a spent in each topology.

    Fractions must be nonnegative and sum to 1 within 1e-12.  Instances are
    immutable; use :meth:`normalized` to rescale an unnormalized map
    explicitly (inputs are never silently rescaled).
    """

    fractions: Mapping[Topology, float] = field(default_factory=dict)

    def __post_init__(self):
        frac = {a: float(self.fractions.get(a, 0.0)) for a in ALPHABET}
        object.__setattr__(self, "fractions", frac)
        for a, lam in frac.items():
            if lam < 0.0 or not math.isfinite(lam):
                raise MixValidationError(f"lambda_{a} = {lam} is not a valid fraction")
        total = sum(frac.values())
        if abs(total - 1.0) > SUM_TOL:
            raise MixValidationError(
                f"topology fractions sum to {total!r}, expected 1 within {SUM_TOL}"
            )

    def __getitem__(self, a: Topology) -> float:
        return self.fractions[a]

    @classmethod
    def from_dict(cls, items: Mapping[str, float]) -> "TopologyMix":
        """Build a mix from a flat name->fraction map; omitted names are 0."""
        known = {a.value for a in ALPHABET}
        unknown = set(items) - known
        if unknown:
            raise MixValidationError(f"unknown topology keys: {sorted(unknown)}")
        return cls({Topology(k): float(v) for k, v in items.items()})

    @classmethod
    def normalized(cls, items: Mapping[str, float] | Mapping[Topology, float]) -> "TopologyMix":
        """Explicitly rescale a nonnegative map to sum 1, then validate."""
        pairs = {(k if isinstance(k, Topology) else Topology(k)): float(v) for k, v in items.items()}
        total = sum(pairs.values())
        if total <= 0:
            raise MixValidationError("cannot normalize a map with nonpositive total mass")
        return cls({k: v / total for k, v in pairs.items()})

    @classmethod
    def load(cls, path) -> "TopologyMix":
        """Read a mix from a TOML file of flat ``name = fraction`` entries."""
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_dict(data)

    def is_symmetric(self, tol: float = SUM_TOL) -> bool:
        """True iff lambda_z1 + lambda_z4 == lambda_z2 + lambda_z3 within tol."""
        lhs = self[Topology.Z1] + self[Topology.Z4]
        rhs = self[Topology.Z2] + self[Topology.Z3]
        return abs(lhs - rhs) <= tol

    def as_dict(self) -> dict[str, float]:
        return {a.value: self[a] for a in ALPHABET}


class FadingKind(enum.Enum):
    UNIFORM_PHASE = "uniform"
    RAYLEIGH = "rayleigh"
    RICE = "rice"


@dataclass(frozen=True)
class FadingModel:
    """I.i.d. complex fading law for the channel coefficients.

    uniform: h = exp(j*theta), theta ~ U[0, 2pi), so |h| = 1.
    rayleigh: zero mean, E{|h|^2} = 1.
    rice: h = N(sqrt(K), 1/2) + j*N(0, 1/2), so E{|h|^2} = K + 1.
    """

    kind: FadingKind
    rice_k: float = 1.0

    def __post_init__(self):
        if self.kind is FadingKind.RICE and self.rice_k < 0:
            raise ValueError(f"Rice factor must be nonnegative, got {self.rice_k}")

    @classmethod
    def uniform_phase(cls) -> "FadingModel":
        return cls(FadingKind.UNIFORM_PHASE)

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls(FadingKind.RAYLEIGH)

    @classmethod
    def rice(cls, k: float = 1.0) -> "FadingModel":
        return cls(FadingKind.RICE, rice_k=k)

    @classmethod
    def parse(cls, name: str, rice_k: float = 1.0) -> "FadingModel":
        kind = FadingKind(name)
        return cls(kind, rice_k=rice_k) if kind is FadingKind.RICE else cls(kind)

    @property
    def mean_power(self) -> float:
        """E{|h|^2} under this law."""
        return self.rice_k + 1.0 if self.kind is FadingKind.RICE else 1.0

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Draw i.i.d. complex coefficients of the given shape."""
        if self.kind is FadingKind.UNIFORM_PHASE:
            theta = rng.uniform(0.0, 2.0 * np.pi, size)
            return np.exp(1j * theta)
        if self.kind is FadingKind.RAYLEIGH:
            re = rng.standard_normal(size)
            im = rng.standard_normal(size)
            return (re + 1j * im) / np.sqrt(2.0)
        sigma = np.sqrt(0.5)
        re = rng.normal(np.sqrt(self.rice_k), sigma, size)
        im = rng.normal(0.0, sigma, size)
        return re + 1j * im

    def __str__(self) -> str:
        if self.kind is FadingKind.RICE:
            return f"rice(K={self.rice_k:g})"
        return self.kind.value


@dataclass(frozen=True)
class ChannelMatrix:
    """One slot's 2x2 complex coefficients, indexed h_ji = (rx j, tx i)."""

    h11: complex
    h12: complex
    h21: complex
    h22: complex

    def as_array(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]])

    @classmethod
    def from_array(cls, h: np.ndarray) -> "ChannelMatrix":
        return cls(complex(h[0, 0]), complex(h[0, 1]), complex(h[1, 0]), complex(h[1, 1]))


def draw_channel(model: FadingModel, rng: np.random.Generator) -> ChannelMatrix:
    """Draw one slot's channel matrix: four i.i.d. coefficients."""
    h = model.sample(rng, 4)
    return ChannelMatrix(complex(h[0]), complex(h[1]), complex(h[2]), complex(h[3]))


def sample_topology_sequence(mix: TopologyMix, n: int, rng: np.random.Generator) -> list[Topology]:
    """Draw n i.i.d. topologies from the mix's categorical law."""
    if n < 1:
        raise ValueError(f"slot count must be >= 1, got {n}")
    probs = np.array([mix[a] for a in ALPHABET])
    idx = rng.choice(len(ALPHABET), size=n, p=probs / probs.sum())
    return [ALPHABET[i] for i in idx]
