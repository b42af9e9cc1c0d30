"""2x2 X-channel with time-varying topology: sum-DoF analysis, coding
across topologies, ergodic-rate Monte Carlo, and a Mars rover-to-orbiter
visibility scenario."""

__version__ = "0.1.0"

from .channel import (
    ChannelMatrix,
    FadingModel,
    MixValidationError,
    Topology,
    TopologyMix,
    draw_channel,
    sample_topology_sequence,
    topology_links,
)
from .dof import DofReport, SymmetryError, gap_statistics
from .scheduler import SchedulePlan, ScheduleReport
from .phy import RateTerms, closed_form_uniform_phase, estimate_rate_terms
from .capacity import GapReport, achievable_sum_rate, capacity_gap, upper_bounds

__all__ = [
    "ChannelMatrix", "FadingModel", "MixValidationError", "Topology",
    "TopologyMix", "draw_channel", "sample_topology_sequence", "topology_links",
    "DofReport", "SymmetryError", "gap_statistics",
    "SchedulePlan", "ScheduleReport",
    "RateTerms", "closed_form_uniform_phase", "estimate_rate_terms",
    "GapReport", "achievable_sum_rate", "capacity_gap", "upper_bounds",
    "__version__",
]
