"""Closed-form sum-DoF values, bounds and gain decompositions.

All functions take a validated :class:`~xchan.channel.TopologyMix`; the
underlying arithmetic also has vectorized forms over raw z/f fraction
arrays, used by the random gap statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import SUM_TOL, Topology, TopologyMix


class SymmetryError(ValueError):
    """A symmetric-only formula was applied to a non-symmetric mix."""


def _require_symmetric(mix: TopologyMix) -> None:
    lhs = mix[Topology.Z1] + mix[Topology.Z4]
    rhs = mix[Topology.Z2] + mix[Topology.Z3]
    if abs(lhs - rhs) > SUM_TOL:
        raise SymmetryError(
            f"mix is not symmetric: lambda_z1 + lambda_z4 = {lhs!r} "
            f"!= lambda_z2 + lambda_z3 = {rhs!r}"
        )


def _gain_symmetric(z1, z2, z3, z4, f):
    return np.minimum.reduce([z1 + z4, z1 + z3 + f, z2 + z4 + f])


def _gain_lower(z1, z2, z3, z4, f):
    return np.minimum.reduce([z1 + z4, z2 + z3, z1 + z3 + f, z2 + z4 + f])


def _gain_upper(z1, z2, z3, z4, f):
    return np.minimum.reduce([(z1 + z2 + z3 + z4) / 2.0, z1 + z3 + f, z2 + z4 + f])


def _zf(mix: TopologyMix):
    return (mix[Topology.Z1], mix[Topology.Z2], mix[Topology.Z3],
            mix[Topology.Z4], mix[Topology.F])


def tdma_dof(mix: TopologyMix) -> float:
    """Best sum-DoF without coding across topologies: 1 + lambda_i1 + lambda_i2."""
    return 1.0 + mix[Topology.I1] + mix[Topology.I2]


def sumdof_symmetric(mix: TopologyMix) -> float:
    """Exact sum-DoF for a symmetric mix (lambda_z1+z4 == lambda_z2+z3)."""
    _require_symmetric(mix)
    return tdma_dof(mix) + float(_gain_symmetric(*_zf(mix)))


def sumdof_lower(mix: TopologyMix) -> float:
    """Achievable sum-DoF of the greedy pairing scheme, any mix."""
    return tdma_dof(mix) + float(_gain_lower(*_zf(mix)))


def sumdof_upper(mix: TopologyMix) -> float:
    """Converse sum-DoF bound, any mix."""
    return tdma_dof(mix) + float(_gain_upper(*_zf(mix)))


def gain_decomposition(mix: TopologyMix) -> tuple[float, float]:
    """Split the symmetric DoF gain into the two coding-opportunity parts.

    Opportunity 1 ({z1,z2} / {z3,z4} pairs) contributes
    min(z1,z2) + min(z3,z4); opportunity 2 ({z2,z4,f} / {z1,z3,f} triples)
    contributes min(|z1-z2|, |z3-z4|, f).
    """
    _require_symmetric(mix)
    z1, z2, z3, z4, f = _zf(mix)
    co1 = min(z1, z2) + min(z3, z4)
    co2 = min(abs(z1 - z2), abs(z3 - z4), f)
    return co1, co2


@dataclass(frozen=True)
class DofReport:
    """Sum-DoF summary for one mix."""

    lower: float
    upper: float
    exact: Optional[float]  # present iff the mix is symmetric
    tdma: float
    co1_gain: Optional[float]
    co2_gain: Optional[float]

    def csv_row(self) -> str:
        exact = "" if self.exact is None else repr(self.exact)
        co1 = "" if self.co1_gain is None else repr(self.co1_gain)
        co2 = "" if self.co2_gain is None else repr(self.co2_gain)
        return f"{self.lower!r},{self.upper!r},{exact},{self.tdma!r},{co1},{co2}"


def report(mix: TopologyMix) -> DofReport:
    """Evaluate all DoF quantities for one mix."""
    if mix.is_symmetric():
        exact = sumdof_symmetric(mix)
        co1, co2 = gain_decomposition(mix)
    else:
        exact, co1, co2 = None, None, None
    return DofReport(
        lower=sumdof_lower(mix),
        upper=sumdof_upper(mix),
        exact=exact,
        tdma=tdma_dof(mix),
        co1_gain=co1,
        co2_gain=co2,
    )


def gap_statistics(z_budget: float, n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Max and mean of (upper - lower) over random z/f fraction vectors.

    (lambda_z1..z4, lambda_f) is drawn uniformly on the simplex (flat
    Dirichlet) scaled to sum z_budget; the rest of the mass sits in s1,
    which enters no bound term.
    """
    if not 0.0 < z_budget <= 1.0:
        raise ValueError(f"z budget must lie in (0, 1], got {z_budget}")
    if n_samples < 1:
        raise ValueError(f"sample count must be >= 1, got {n_samples}")
    w = rng.dirichlet(np.ones(5), size=n_samples) * z_budget
    z1, z2, z3, z4, f = w.T
    gap = _gain_upper(z1, z2, z3, z4, f) - _gain_lower(z1, z2, z3, z4, f)
    return float(gap.max()), float(gap.mean())
