"""Mars rover-to-orbiter scenario: circular-orbit propagation, 10-degree
line-of-sight detection, per-orbiter-pair topology statistics, free-space
link budget, and the coding-across-topologies vs TDMA comparison.

Geometry is two-body circular (no J2, drag or eccentricity): topology
statistics at this fidelity depend only on pass geometry.  Orbiters are the
receivers of the induced 2x2 X-channels; rovers are the transmitters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # py3.10
    import tomli as tomllib

from .channel import FadingModel, Topology, TopologyMix
from . import phy, scheduler

C_LIGHT_M_S = 299_792_458.0
BOLTZMANN_J_K = 1.380649e-23

ORBITER_PAIRS: tuple[tuple[int, int], ...] = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class MarsConstants:
    radius_km: float = 3389.5
    sol_s: float = 88775.2
    mu_km3_s2: float = 42828.37
    # sidereal rotation (88642.663 s period); the sol is the solar day
    rotation_rate_rad_s: float = 2.0 * math.pi / 88642.663


@dataclass(frozen=True)
class OrbiterSpec:
    """Circular orbit: altitude, inclination, node longitude, initial phase."""

    altitude_km: float
    inclination_deg: float
    raan_deg: float
    anomaly_deg: float
    id: str = ""

    def __post_init__(self):
        if self.altitude_km <= 0:
            raise ValueError(f"orbit altitude must be positive, got {self.altitude_km}")
        for name in ("inclination_deg", "raan_deg", "anomaly_deg"):
            object.__setattr__(self, name, float(getattr(self, name)) % 360.0)

    def angular_rate(self, mars: MarsConstants) -> float:
        r = mars.radius_km + self.altitude_km
        return math.sqrt(mars.mu_km3_s2 / r**3)

    def period_s(self, mars: MarsConstants) -> float:
        return 2.0 * math.pi / self.angular_rate(mars)


@dataclass(frozen=True)
class RoverSpec:
    latitude_deg: float
    longitude_deg: float
    id: str = ""

    def __post_init__(self):
        if abs(self.latitude_deg) > 90.0:
            raise ValueError(f"latitude must lie in [-90, 90], got {self.latitude_deg}")


@dataclass(frozen=True)
class LinkBudget:
    """Free-space link parameters (path loss exponent 2)."""

    tx_power_w: float = 10.0
    system_temperature_k: float = 500.0
    bandwidth_hz: float = 800e3
    carrier_frequency_hz: float = 401.6e6   # Mars UHF proximity band
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0

    def __post_init__(self):
        for name in ("tx_power_w", "system_temperature_k", "bandwidth_hz",
                     "carrier_frequency_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def noise_power_w(self) -> float:
        return BOLTZMANN_J_K * self.system_temperature_k * self.bandwidth_hz

    def snr_at_range(self, slant_range_km):
        """Linear SNR at a slant range (km); vectorized over the range."""
        d_m = np.asarray(slant_range_km, dtype=float) * 1e3
        lam = C_LIGHT_M_S / self.carrier_frequency_hz
        gains = 10.0 ** ((self.tx_gain_dbi + self.rx_gain_dbi) / 10.0)
        rx_w = self.tx_power_w * gains * (lam / (4.0 * math.pi * d_m)) ** 2
        return rx_w / self.noise_power_w


def propagate(o: OrbiterSpec, t, mars: MarsConstants = MarsConstants()) -> np.ndarray:
    """Mars-centered inertial position (km) at time(s) t; shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    r = mars.radius_km + o.altitude_km
    u = math.radians(o.anomaly_deg) + o.angular_rate(mars) * t
    inc = math.radians(o.inclination_deg)
    raan = math.radians(o.raan_deg)
    # in-plane position rotated by inclination about x, then node about z
    x_orb, y_orb = r * np.cos(u), r * np.sin(u)
    y_inc = y_orb * math.cos(inc)
    z_inc = y_orb * math.sin(inc)
    x = x_orb * math.cos(raan) - y_inc * math.sin(raan)
    y = x_orb * math.sin(raan) + y_inc * math.cos(raan)
    return np.stack(np.broadcast_arrays(x, y, z_inc), axis=-1)


def rover_position(rv: RoverSpec, t, mars: MarsConstants = MarsConstants()) -> np.ndarray:
    """Surface position (km) at time(s) t, co-rotating with Mars."""
    t = np.asarray(t, dtype=float)
    lat = math.radians(rv.latitude_deg)
    lon = math.radians(rv.longitude_deg) + mars.rotation_rate_rad_s * t
    x = mars.radius_km * math.cos(lat) * np.cos(lon)
    y = mars.radius_km * math.cos(lat) * np.sin(lon)
    z = mars.radius_km * math.sin(lat) * np.ones_like(lon)
    return np.stack(np.broadcast_arrays(x, y, z), axis=-1)


def elevation(rover_pos, orbiter_pos) -> np.ndarray:
    """Elevation (deg) of the orbiter above the rover's tangent plane."""
    r = np.asarray(rover_pos, dtype=float)
    s = np.asarray(orbiter_pos, dtype=float)
    los = s - r
    dist = np.linalg.norm(los, axis=-1)
    if np.any(dist == 0):
        raise ValueError("rover and orbiter positions coincide")
    rhat = r / np.linalg.norm(r, axis=-1, keepdims=True)
    sin_el = np.sum(los * rhat, axis=-1) / dist
    return np.degrees(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


@dataclass(frozen=True)
class Scenario:
    orbiters: tuple[OrbiterSpec, ...]
    rovers: tuple[RoverSpec, ...]
    mars: MarsConstants = MarsConstants()
    link: LinkBudget = LinkBudget()
    duration_s: float = MarsConstants.sol_s
    dt_s: float = 10.0
    rice_k: float = 10.0          # near line-of-sight links
    min_elevation_deg: float = 10.0

    def __post_init__(self):
        if len(self.rovers) != 2 or len(self.orbiters) != 4:
            raise ValueError("scenario needs exactly 2 rovers and 4 orbiters")
        if self.dt_s <= 0 or self.duration_s <= 0:
            raise ValueError("duration and time step must be positive")


@dataclass(frozen=True)
class LinkTrace:
    """Per-step LOS link matrix: links[k, rover, orbiter]."""

    times: np.ndarray
    links: np.ndarray            # bool, shape (n, 2, 4)
    slant_km: np.ndarray         # float, shape (n, 2, 4)


def topology_trace(scenario: Scenario) -> LinkTrace:
    """Sample the 2x4 LOS link matrix over the scenario duration."""
    n = int(round(scenario.duration_s / scenario.dt_s))
    t = np.arange(n) * scenario.dt_s
    rv_pos = np.stack([rover_position(r, t, scenario.mars) for r in scenario.rovers], axis=1)
    ob_pos = np.stack([propagate(o, t, scenario.mars) for o in scenario.orbiters], axis=1)
    el = elevation(rv_pos[:, :, None, :], ob_pos[:, None, :, :])
    rng_km = np.linalg.norm(ob_pos[:, None, :, :] - rv_pos[:, :, None, :], axis=-1)
    return LinkTrace(times=t, links=el >= scenario.min_elevation_deg, slant_km=rng_km)


def count_passes(visible: np.ndarray) -> int:
    """Number of rising edges in a boolean visibility series."""
    v = np.asarray(visible, dtype=bool).astype(int)
    return int(np.sum(np.diff(v) == 1) + v[0])


_TOPOLOGY_BY_CODE = {8 * c[0] + 4 * c[1] + 2 * c[2] + c[3]: a
                     for a in Topology for c in [a.links]}


def assign_pairs(links: np.ndarray) -> np.ndarray:
    """Assign each active step to one orbiter pair (-1 where inactive).

    The pair covering the most links at the step wins; ties break toward
    the lowest pair index.
    """
    per_orbiter = links.sum(axis=1)                       # (n, 4)
    pair_counts = np.stack([per_orbiter[:, a] + per_orbiter[:, b]
                            for a, b in ORBITER_PAIRS], axis=1)
    assigned = np.argmax(pair_counts, axis=1)
    assigned[per_orbiter.sum(axis=1) == 0] = -1
    return assigned


def pair_topology_codes(links: np.ndarray, pair: tuple[int, int]) -> np.ndarray:
    """4-bit code of the 2x2 subnetwork induced by a pair, per step."""
    a, b = pair
    c11 = links[:, 0, a].astype(int)
    c12 = links[:, 1, a].astype(int)
    c21 = links[:, 0, b].astype(int)
    c22 = links[:, 1, b].astype(int)
    return 8 * c11 + 4 * c12 + 2 * c21 + c22


def extract_mixes(trace: LinkTrace) -> dict[tuple[int, int], tuple[TopologyMix, int]]:
    """Per-pair topology mixes over the steps assigned to each pair."""
    assigned = assign_pairs(trace.links)
    out = {}
    for p, pair in enumerate(ORBITER_PAIRS):
        steps = np.nonzero(assigned == p)[0]
        if steps.size == 0:
            continue
        codes = pair_topology_codes(trace.links[steps], pair)
        fracs = {}
        for code, cnt in zip(*np.unique(codes, return_counts=True)):
            fracs[_TOPOLOGY_BY_CODE[int(code)]] = cnt / steps.size
        out[pair] = (TopologyMix(fracs), int(steps.size))
    return out


def snr(rover: RoverSpec, orbiter: OrbiterSpec, t: float, budget: LinkBudget,
        mars: MarsConstants = MarsConstants(), min_elevation_deg: float = 10.0) -> float:
    """Linear SNR of one link at time t; raises when there is no LOS."""
    r = rover_position(rover, t, mars)
    s = propagate(orbiter, t, mars)
    el = float(elevation(r, s))
    if el < min_elevation_deg:
        raise ValueError(f"no line of sight at t={t}: elevation {el:.2f} deg")
    d_km = float(np.linalg.norm(s - r))
    return float(budget.snr_at_range(d_km))


# ---------------------------------------------------------------------------
# CAT-vs-TDMA comparison

@dataclass(frozen=True)
class PairOutcome:
    pair: tuple[int, int]
    steps: int
    mix: TopologyMix
    cat_symbols: int
    baseline_symbols: int
    cat_rate_hz_s: float       # sum of per-slot spectral efficiencies (bits/Hz)
    tdma_rate_hz_s: float


@dataclass(frozen=True)
class ComparisonReport:
    dof_gain_percent: float
    throughput_gain_percent: float
    cat_dof: float
    tdma_dof: float
    cat_throughput_bps: float
    tdma_throughput_bps: float
    three_plus_link_fraction: float
    active_steps: int
    total_steps: int
    pairs: tuple[PairOutcome, ...]


def _mirror_tx_rx(g: np.ndarray) -> np.ndarray:
    """Relabel both receivers and transmitters of a (slot, rx, tx) gain stack."""
    return g[:, ::-1, ::-1]


def _mirror_rx(g: np.ndarray) -> np.ndarray:
    return g[:, ::-1, :]


def _solo_rate(topology: Topology, g: np.ndarray) -> float:
    """One slot's spectral efficiency given its 2x2 effective gains.

    Single-destination topologies use a point-to-point code (the broadcast
    ones decode at the better receiver); anything with two links into one
    receiver runs as a MAC; interference-free topologies carry two parallel
    streams.
    """
    p = np.abs(g) ** 2
    c11, c12, c21, c22 = topology.links
    if topology in (Topology.I1, Topology.I2):
        on = [(j, i) for j, i in ((0, 0), (0, 1), (1, 0), (1, 1))
              if topology.links[2 * j + i]]
        return float(sum(math.log2(1.0 + p[j, i]) for j, i in on))
    row1 = c11 * p[0, 0] + c12 * p[0, 1]
    row2 = c21 * p[1, 0] + c22 * p[1, 1]
    if c11 + c12 == 2 and c21 + c22 == 2:       # fully connected: best MAC
        return float(math.log2(1.0 + max(row1, row2)))
    if c11 + c12 == 2:
        return float(math.log2(1.0 + row1))     # MAC into receiver 1
    if c21 + c22 == 2:
        return float(math.log2(1.0 + row2))     # MAC into receiver 2
    return float(math.log2(1.0 + max(row1, row2)))  # single link or broadcast


def _group_rate(group, gains: np.ndarray) -> float:
    """Total spectral efficiency of one schedule group (gains indexed by slot)."""
    if isinstance(group, scheduler.SoloGroup):
        return _solo_rate(group.topology, gains[group.slot])
    g = gains[list(group.slots)]
    if isinstance(group, scheduler.PairGroup):
        if group.kind == scheduler.PAIR34:
            g = _mirror_tx_rx(g)
        r1 = phy.co1_rx1_rate(g[0, 0, 0], g[0, 0, 1], g[1, 0, 1], 1.0)
        r2 = phy.co1_rx2_rate(g[0, 1, 1], g[1, 1, 0], g[1, 1, 1], 1.0)
        return float(r1 + r2)
    if group.kind == scheduler.TRIPLE13F:
        g = _mirror_rx(g)
    r1 = phy.co2_rx1_rate(g[0, 0, 1], g[1, 0, 0], g[1, 0, 1], g[2, 0, 0], g[2, 0, 1], 1.0)
    r2 = phy.co2_rx2_rate(g[0, 1, 0], g[0, 1, 1], g[1, 1, 0], g[2, 1, 1], g[2, 1, 0], 1.0)
    return float(r1 + r2)


def _tdma_rate(topology: Topology, det_snr: np.ndarray, g: np.ndarray) -> float:
    """Best single link by deterministic SNR, decoded with its realized fade."""
    best, best_det = None, -1.0
    for j, i in ((0, 0), (0, 1), (1, 0), (1, 1)):
        if topology.links[2 * j + i] and det_snr[j, i] > best_det:
            best, best_det = (j, i), det_snr[j, i]
    return float(math.log2(1.0 + np.abs(g[best]) ** 2))


def compare(scenario: Scenario, rng: np.random.Generator) -> ComparisonReport:
    """Full pipeline: trace, per-pair scheduling, rates, and gains over TDMA."""
    trace = topology_trace(scenario)
    assigned = assign_pairs(trace.links)
    active = assigned >= 0
    n_active = int(active.sum())
    if n_active == 0:
        raise ValueError("scenario has no active steps: no link ever has LOS")

    fade_model = FadingModel.rice(scenario.rice_k)
    fade_scale = 1.0 / math.sqrt(fade_model.mean_power)  # unit mean link power

    outcomes = []
    three_plus = 0
    for p, pair in enumerate(ORBITER_PAIRS):
        steps = np.nonzero(assigned == p)[0]
        if steps.size == 0:
            continue
        codes = pair_topology_codes(trace.links[steps], pair)
        topos = [_TOPOLOGY_BY_CODE[int(c)] for c in codes]
        three_plus += int(sum(1 for a in topos if a.link_count >= 3))

        seq_plan = scheduler.plan(topos)
        rep = scheduler.report(seq_plan)
        n_i = sum(1 for a in topos if a in (Topology.I1, Topology.I2))
        baseline_symbols = len(topos) + n_i

        # deterministic SNR per (slot, rx orbiter, tx rover) and faded gains
        a, b = pair
        d_km = trace.slant_km[steps][:, :, [a, b]]          # (m, rover, orbiter)
        det = scenario.link.snr_at_range(d_km)
        det = np.transpose(det, (0, 2, 1))                   # (m, rx, tx)
        fades = fade_model.sample(rng, det.shape) * fade_scale
        gains = np.sqrt(det) * fades

        cat_rate = sum(_group_rate(g, gains) for g in seq_plan.groups)
        tdma = sum(_tdma_rate(a_t, det[k], gains[k]) for k, a_t in enumerate(topos))

        fracs = {}
        for code, cnt in zip(*np.unique(codes, return_counts=True)):
            fracs[_TOPOLOGY_BY_CODE[int(code)]] = cnt / steps.size
        outcomes.append(PairOutcome(
            pair=pair, steps=int(steps.size), mix=TopologyMix(fracs),
            cat_symbols=rep.symbols_delivered, baseline_symbols=baseline_symbols,
            cat_rate_hz_s=float(cat_rate), tdma_rate_hz_s=float(tdma),
        ))

    cat_symbols = sum(o.cat_symbols for o in outcomes)
    base_symbols = sum(o.baseline_symbols for o in outcomes)
    cat_rate = sum(o.cat_rate_hz_s for o in outcomes)
    tdma_rate = sum(o.tdma_rate_hz_s for o in outcomes)
    bw = scenario.link.bandwidth_hz
    return ComparisonReport(
        dof_gain_percent=100.0 * (cat_symbols - base_symbols) / base_symbols,
        throughput_gain_percent=100.0 * (cat_rate - tdma_rate) / tdma_rate,
        cat_dof=cat_symbols / n_active,
        tdma_dof=base_symbols / n_active,
        cat_throughput_bps=cat_rate * bw / n_active,
        tdma_throughput_bps=tdma_rate * bw / n_active,
        three_plus_link_fraction=three_plus / n_active,
        active_steps=n_active,
        total_steps=int(trace.times.size),
        pairs=tuple(outcomes),
    )


# ---------------------------------------------------------------------------
# scenario construction and serialization

def default_scenario(rover_separation_km: float = 600.0,
                     rover_latitude_deg: float = 76.0,
                     duration_s: Optional[float] = None,
                     dt_s: float = 10.0) -> Scenario:
    """Representative 2-rover, 4-orbiter configuration.

    Two orbiters fly an MRO-like orbit (300 km, 92.6 deg), two an
    Odyssey-like orbit (400 km, 93.1 deg), with uniformly spaced ascending
    nodes.  Initial phases put each altitude class over the north polar cap
    together (the classes drift apart and realign over the sol, which is
    what makes the topology variation rich).  Rovers sit at a common high
    latitude separated by the requested great-circle distance.
    """
    mars = MarsConstants()
    lat = math.radians(rover_latitude_deg)
    central = rover_separation_km / mars.radius_km
    cos_dlon = (math.cos(central) - math.sin(lat) ** 2) / math.cos(lat) ** 2
    if abs(cos_dlon) > 1.0:
        raise ValueError(
            f"separation {rover_separation_km} km unreachable at latitude "
            f"{rover_latitude_deg} deg")
    dlon = math.degrees(math.acos(cos_dlon))
    orbiters = (
        OrbiterSpec(300.0, 92.6, 0.0, 90.0, id="mro-a"),
        OrbiterSpec(300.0, 92.6, 90.0, 90.0, id="mro-b"),
        OrbiterSpec(400.0, 93.1, 180.0, 270.0, id="odyssey-a"),
        OrbiterSpec(400.0, 93.1, 270.0, 270.0, id="odyssey-b"),
    )
    rovers = (
        RoverSpec(rover_latitude_deg, -dlon / 2.0, id="rover-1"),
        RoverSpec(rover_latitude_deg, dlon / 2.0, id="rover-2"),
    )
    return Scenario(orbiters=orbiters, rovers=rovers, mars=mars,
                    duration_s=mars.sol_s if duration_s is None else duration_s,
                    dt_s=dt_s)


def _numbered_tables(data: dict, prefix: str) -> list[dict]:
    table = data.get(prefix, {})
    if not isinstance(table, dict):
        raise ValueError(f"[{prefix}.N] tables expected")
    return [table[k] for k in sorted(table)]


def load_scenario(path) -> Scenario:
    """Read a scenario from a TOML file with [mars], [orbiter.N], [rover.N],
    [link] and optional [sim] tables."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    mars = MarsConstants(**data.get("mars", {}))
    link = LinkBudget(**data.get("link", {}))
    orbiters = tuple(OrbiterSpec(**t) for t in _numbered_tables(data, "orbiter"))
    rovers = tuple(RoverSpec(**t) for t in _numbered_tables(data, "rover"))
    sim = data.get("sim", {})
    return Scenario(orbiters=orbiters, rovers=rovers, mars=mars, link=link,
                    duration_s=float(sim.get("duration_s", mars.sol_s)),
                    dt_s=float(sim.get("dt_s", 10.0)),
                    rice_k=float(sim.get("rice_k", 10.0)),
                    min_elevation_deg=float(sim.get("min_elevation_deg", 10.0)))


def scenario_with(scenario: Scenario, **overrides) -> Scenario:
    return replace(scenario, **overrides)
