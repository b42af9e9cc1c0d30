import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xchan.channel import Topology, TopologyMix
from xchan.dof import (
    SymmetryError,
    gain_decomposition,
    gap_statistics,
    report,
    sumdof_lower,
    sumdof_symmetric,
    sumdof_upper,
    tdma_dof,
)


def mix(**kv):
    return TopologyMix.from_dict(kv)


@st.composite
def random_mixes(draw, symmetric=False):
    weights = [draw(st.floats(0.0, 1.0)) for _ in range(15)]
    if sum(weights) == 0.0:
        weights[0] = 1.0
    m = dict(zip((a.value for a in Topology), weights))
    if symmetric:
        # rebalance one z entry so z1 + z4 == z2 + z3; when the natural
        # candidate would go negative the mirrored one cannot
        z4 = m["z2"] + m["z3"] - m["z1"]
        if z4 >= 0:
            m["z4"] = z4
        else:
            m["z2"] = m["z1"] + m["z4"] - m["z3"]
    return TopologyMix.normalized(m)


class TestExactFormula:
    def test_interference_free(self):
        assert sumdof_symmetric(mix(i1=1.0)) == 2.0

    def test_pair_mix(self):
        assert sumdof_symmetric(mix(z1=0.5, z2=0.5)) == 1.5

    def test_triple_mix(self):
        third = 1 / 3
        assert sumdof_symmetric(mix(z2=third, z4=third, f=third)) == 4 / 3

    def test_hand_evaluation(self):
        # 1 + min{0.2, 0.5, 0.5}
        m = mix(z1=0.05, z2=0.05, z3=0.15, z4=0.15, f=0.3, m1=0.3)
        assert sumdof_symmetric(m) == pytest.approx(1.2, abs=1e-15)

    def test_rejects_asymmetric(self):
        with pytest.raises(SymmetryError, match="z1"):
            sumdof_symmetric(mix(z1=0.6, z3=0.4))


class TestBounds:
    def test_orphan_pairs(self):
        m = mix(z1=0.5, z3=0.5)
        assert sumdof_lower(m) == 1.0
        assert sumdof_upper(m) == 1.0

    def test_z_with_f(self):
        m = mix(z1=0.4, f=0.6)
        assert sumdof_lower(m) == 1.0
        assert sumdof_upper(m) == pytest.approx(1.2)

    def test_bounds_coincide_under_symmetry(self):
        m = mix(z1=0.5, z2=0.5)
        assert sumdof_lower(m) == sumdof_upper(m) == 1.5


class TestBaselinesAndGains:
    def test_tdma(self):
        assert tdma_dof(mix(f=1.0)) == 1.0
        assert tdma_dof(mix(i1=1.0)) == 2.0
        assert tdma_dof(mix(z1=0.5, z2=0.5)) == 1.0

    def test_gain_split_pairs(self):
        assert gain_decomposition(mix(z1=0.5, z2=0.5)) == (0.5, 0.0)

    def test_gain_split_triples(self):
        third = 1 / 3
        co1, co2 = gain_decomposition(mix(z2=third, z4=third, f=third))
        assert co1 == 0.0
        assert co2 == pytest.approx(third)

    def test_gain_split_hand_evaluation(self):
        m = mix(z1=0.1, z2=0.2, z3=0.1, z4=0.2, f=0.2, s1=0.2)
        co1, co2 = gain_decomposition(m)
        assert co1 == pytest.approx(0.2)
        assert co2 == pytest.approx(0.1)

    def test_gain_split_rejects_asymmetric(self):
        with pytest.raises(SymmetryError):
            gain_decomposition(mix(z1=0.6, z2=0.4))


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(random_mixes())
    def test_ordering(self, m):
        assert tdma_dof(m) <= sumdof_lower(m) + 1e-12
        assert sumdof_lower(m) <= sumdof_upper(m) + 1e-12
        assert 1.0 <= sumdof_lower(m) and sumdof_upper(m) <= 2.0 + 1e-12

    @settings(max_examples=200, deadline=None)
    @given(random_mixes(symmetric=True))
    def test_symmetric_collapse(self, m):
        exact = sumdof_symmetric(m)
        assert sumdof_lower(m) == pytest.approx(exact, abs=1e-12)
        assert sumdof_upper(m) == pytest.approx(exact, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(random_mixes(symmetric=True))
    def test_gain_decomposition_identity(self, m):
        co1, co2 = gain_decomposition(m)
        assert tdma_dof(m) + co1 + co2 == pytest.approx(sumdof_symmetric(m), abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(random_mixes())
    def test_gap_bounded_by_half_zf_mass(self, m):
        zf = sum(m[a] for a in (Topology.Z1, Topology.Z2, Topology.Z3,
                                Topology.Z4, Topology.F))
        assert sumdof_upper(m) - sumdof_lower(m) <= zf / 2 + 1e-12

    def test_report_fields(self):
        rep = report(mix(z1=0.5, z2=0.5))
        assert (rep.lower, rep.upper, rep.exact) == (1.5, 1.5, 1.5)
        assert (rep.tdma, rep.co1_gain, rep.co2_gain) == (1.0, 0.5, 0.0)
        rep = report(mix(z1=0.6, z3=0.4))
        assert rep.exact is None and rep.co1_gain is None


class TestGapStatistics:
    def test_mean_in_published_band(self):
        mx, mean = gap_statistics(0.2, 10_000, np.random.default_rng(7))
        assert 0.009 <= mean <= 0.035

    def test_max_below_analytic_supremum(self):
        mx, _ = gap_statistics(0.5, 10_000, np.random.default_rng(8))
        assert mx <= 0.25

    def test_zero_gap_when_f_zero_and_single_z(self):
        # only z1 mass: both min terms vanish, bounds coincide
        m = mix(z1=0.3, s1=0.7)
        assert sumdof_upper(m) - sumdof_lower(m) == 0.0

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            gap_statistics(0.0, 10, rng)
        with pytest.raises(ValueError):
            gap_statistics(0.5, 0, rng)

    def test_reproducible(self):
        a = gap_statistics(0.5, 1000, np.random.default_rng(5))
        b = gap_statistics(0.5, 1000, np.random.default_rng(5))
        assert a == b
