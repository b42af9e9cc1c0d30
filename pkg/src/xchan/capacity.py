"""Ergodic sum-rate assembly, upper bounds and constant-gap evaluation.

Combines precomputed rate terms (see :mod:`xchan.phy`) with a topology mix:
the achievable sum rate weights A..D by the time fractions each scheme
component occupies, and the three converse bounds weight A, B, E, F plus a
log2(pi*e) differential-entropy constant.  Monte Carlo uncertainty is
propagated linearly through the weights (conservative for correlated
terms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import Topology, TopologyMix
from .dof import _require_symmetric
from .phy import RateTerms

LOG2_PI_E = math.log2(math.pi * math.e)  # ~3.0942


def _lam(mix: TopologyMix) -> dict[str, float]:
    return {a.value: mix[a] for a in Topology}


def phi_fraction(mix: TopologyMix) -> float:
    """Fraction of slots consumed per triple: min(|z1 - z2|, f)."""
    return min(abs(mix[Topology.Z1] - mix[Topology.Z2]), mix[Topology.F])


def _rate_weights(mix: TopologyMix) -> dict[str, float]:
    """Bracket weights of the achievable sum rate on A, B, C, D."""
    v = _lam(mix)
    phi = phi_fraction(mix)
    dz12 = abs(v["z1"] - v["z2"])
    dz34 = abs(v["z3"] - v["z4"])
    return {
        "a": v["s1"] + v["s2"] + v["s3"] + v["s4"] + 2.0 * (v["i1"] + v["i2"])
             + v["b1"] + v["b2"],
        "b": v["m1"] + v["m2"] + dz12 + dz34 + v["f"] - 3.0 * phi,
        "c": min(v["z1"], v["z2"]) + min(v["z3"], v["z4"]),
        "d": phi,
    }


def _weighted(weights: dict[str, float], terms: RateTerms) -> tuple[float, float]:
    value = sum(w * terms.term(name) for name, w in weights.items())
    sigma = sum(abs(w) * terms.se.get(name, 0.0) for name, w in weights.items())
    return value, sigma


def achievable_sum_rate(mix: TopologyMix, terms: RateTerms) -> float:
    """Ergodic sum rate of the coding-across-topologies scheme (symmetric mix)."""
    _require_symmetric(mix)
    return _weighted(_rate_weights(mix), terms)[0]


def tdma_rate(terms: RateTerms) -> float:
    """One point-to-point link per slot."""
    return terms.term("a")


def per_topology_rate(mix: TopologyMix, terms: RateTerms) -> float:
    """Best rate with coding confined to each topology separately.

    Interference-free and single-destination topologies use point-to-point
    codes; every multiple-access-capable topology (m, z, f) runs as a MAC.
    """
    v = _lam(mix)
    weights = {
        "a": v["s1"] + v["s2"] + v["s3"] + v["s4"] + 2.0 * (v["i1"] + v["i2"])
             + v["b1"] + v["b2"],
        "b": v["m1"] + v["m2"] + v["z1"] + v["z2"] + v["z3"] + v["z4"] + v["f"],
    }
    return _weighted(weights, terms)[0]


def _bound_weights(mix: TopologyMix) -> dict[str, dict[str, float]]:
    """Weights of U1, U2, U3 on (A, B, E, F, log2(pi e))."""
    v = _lam(mix)
    s_sum = v["s1"] + v["s2"] + v["s3"] + v["s4"]
    i_sum = v["i1"] + v["i2"]
    z_sum = v["z1"] + v["z2"] + v["z3"] + v["z4"]
    base_a = s_sum + 2.0 * i_sum + v["b1"] + v["b2"]
    const23 = 1.0 + i_sum + 2.0 * (v["z1"] + v["z4"]) + v["f"]
    return {
        "u1": {
            "a": base_a + v["z1"] + v["z4"],
            "b": v["m1"] + v["m2"] + z_sum + v["f"],
            "e": v["z1"] + v["z4"],
            "const": s_sum + v["m1"] + v["m2"] + 2.0 * i_sum
                     + 2.0 * (v["z1"] + v["z4"]),
        },
        "u2": {
            "a": base_a + v["z1"] + v["z3"],
            "b": v["m1"] + v["m2"] + z_sum + 2.0 * v["f"],
            "f": v["z2"] + v["z4"],
            "const": const23,
        },
        "u3": {
            "a": base_a + v["z2"] + v["z4"],
            "b": v["m1"] + v["m2"] + z_sum + 2.0 * v["f"],
            "f": v["z1"] + v["z3"],
            "const": const23,
        },
    }


def upper_bounds(mix: TopologyMix, terms: RateTerms) -> tuple[float, float, float]:
    """The three ergodic sum-capacity upper bounds (requires terms E and F)."""
    if terms.e is None or terms.f is None:
        raise ValueError("upper bounds need the E and F rate terms")
    out = []
    for spec in _bound_weights(mix).values():
        const = spec.pop("const")
        value, _ = _weighted(spec, terms)
        out.append(value + LOG2_PI_E * const)
    return tuple(out)


def _bounds_sigma(mix: TopologyMix, terms: RateTerms) -> list[float]:
    out = []
    for spec in _bound_weights(mix).values():
        spec.pop("const")
        out.append(_weighted(spec, terms)[1])
    return out


@dataclass(frozen=True)
class GapReport:
    """Achievable rate vs. the tightest upper bound for one mix and power."""

    r_sum: float
    u1: float
    u2: float
    u3: float
    gap: float
    phi: float
    constant_gap_condition_met: bool  # z1 == z2 or f <= |z1 - z2|
    sigma: float                   # combined MC uncertainty of the gap

    @property
    def u_min(self) -> float:
        return min(self.u1, self.u2, self.u3)


def capacity_gap(mix: TopologyMix, terms: RateTerms, tol: float = 1e-12) -> GapReport:
    """Assemble the gap between min(U1, U2, U3) and the achievable sum rate."""
    _require_symmetric(mix)
    r, r_sigma = _weighted(_rate_weights(mix), terms)
    u1, u2, u3 = upper_bounds(mix, terms)
    u_sigmas = _bounds_sigma(mix, terms)
    k = min(range(3), key=lambda j: (u1, u2, u3)[j])
    dz = abs(mix[Topology.Z1] - mix[Topology.Z2])
    return GapReport(
        r_sum=r,
        u1=u1, u2=u2, u3=u3,
        gap=min(u1, u2, u3) - r,
        phi=phi_fraction(mix),
        constant_gap_condition_met=(dz <= tol or mix[Topology.F] <= dz + tol),
        sigma=r_sigma + u_sigmas[k],
    )
