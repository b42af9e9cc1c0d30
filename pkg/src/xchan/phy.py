"""Symbol-level simulation of the two coding opportunities and Monte Carlo
estimation of the six ergodic rate terms.

All rates are in bits per channel use (logs base 2).  Transmit symbols are
unit power and scaled by sqrt(P); receiver noise is unit-variance complex
Gaussian.  Singular cancellations (a needed coefficient exactly zero) are
probability-zero events and raise instead of being resampled, so Monte
Carlo estimates are never silently biased.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import ChannelMatrix, FadingModel

TERM_NAMES = ("a", "b", "c", "d", "e", "f")


class SingularCancellationError(ArithmeticError):
    """A cancellation coefficient is exactly zero (probability-zero event)."""


def complex_noise(rng: np.random.Generator, size) -> np.ndarray:
    """Unit-variance circularly symmetric complex Gaussian draws."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# per-instance rate kernels (vectorized; shared by the MC estimator and the
# orbiter scenario, which feeds slot-specific effective gains at P = 1)

def co1_rx1_rate(h11_1, h12_1, h12_2, P):
    """log2 det(I + P V V^H) with V = [[h11(1), h12(1)], [0, h12(2)]]."""
    g1 = np.abs(h11_1) ** 2 + np.abs(h12_1) ** 2
    g2 = np.abs(h12_2) ** 2
    det = (1.0 + P * g1) * (1.0 + P * g2) - P * P * np.abs(h12_1) ** 2 * g2
    return np.log2(det)


def co1_rx2_rate(h22_1, h21_2, h22_2, P):
    """Rate of the post-cancellation stream: the slot-1 interferer is removed
    at the cost of noise scaled by |h22(2)/h22(1)|^2."""
    ratio = np.abs(h22_2) ** 2 / np.abs(h22_1) ** 2
    return np.log2(1.0 + np.abs(h21_2) ** 2 * P / (1.0 + ratio))


def _co2_side_rate(g_ref, g_row1_a, g_row1_b, g_row2, g_slot3, P):
    """One receiver's MIMO rate in a triple instance.

    g_ref is the coefficient used for cancellation, g_slot3 the same link's
    slot-3 coefficient (their power ratio colors the residual noise), and
    [[g_row1_a, g_row1_b], [0, g_row2]] the effective 2x2 system.
    """
    q = np.abs(g_slot3) ** 2 / np.abs(g_ref) ** 2
    g1 = np.abs(g_row1_a) ** 2 + np.abs(g_row1_b) ** 2
    g2 = np.abs(g_row2) ** 2
    det = (1.0 + P * g1) * (1.0 + q + P * g2) - P * P * np.abs(g_row1_b) ** 2 * g2
    return np.log2(det / (1.0 + q))


def co2_rx1_rate(h12_1, h11_2, h12_2, h11_3, h12_3, P):
    """Receiver-1 rate: U = [[h12(2), h11(2)], [0, h11(3)]], reference h12(1)."""
    return _co2_side_rate(h12_1, h12_2, h11_2, h11_3, h12_3, P)


def co2_rx2_rate(h21_1, h22_1, h21_2, h22_3, h21_3, P):
    """Receiver-2 mirror: U = [[h21(1), h22(1)], [0, h22(3)]], reference h21(2)."""
    return _co2_side_rate(h21_2, h21_1, h22_1, h22_3, h21_3, P)


def co1_instance_rate(h1: ChannelMatrix, h2: ChannelMatrix, P: float) -> tuple[float, float]:
    """(rx1, rx2) rates of one {z1, z2} pair with slot matrices h1, h2."""
    r1 = co1_rx1_rate(h1.h11, h1.h12, h2.h12, P)
    r2 = co1_rx2_rate(h1.h22, h2.h21, h2.h22, P)
    return float(r1), float(r2)


def co2_instance_rate(h1: ChannelMatrix, h2: ChannelMatrix, h3: ChannelMatrix,
                      P: float) -> tuple[float, float]:
    """(rx1, rx2) rates of one {z2, z4, f} triple with slot matrices h1..h3."""
    r1 = co2_rx1_rate(h1.h12, h2.h11, h2.h12, h3.h11, h3.h12, P)
    r2 = co2_rx2_rate(h1.h21, h1.h22, h2.h21, h3.h22, h3.h21, P)
    return float(r1), float(r2)


# ---------------------------------------------------------------------------
# symbol-level traces

@dataclass(frozen=True)
class Co1Trace:
    """Trace of one 2-slot pair instance (slot 1 topology z1, slot 2 z2)."""

    received: np.ndarray       # (2 slots, 2 receivers) complex
    rx1_system: np.ndarray     # V: [Y1(1), Y1(2)] = sqrt(P) V (x1(1), x2(1)) + noise
    rx1_observations: np.ndarray
    rx2_residual: complex      # Y2(2) after cancelling the slot-1 symbol of Tx2
    rx2_effective_snr: float


@dataclass(frozen=True)
class Co2Trace:
    """Trace of one 3-slot triple instance (topologies z2, z4, f in order).

    With ``mirrored`` set, the slots were {z1, z3, f} and the two receiver
    labels are swapped relative to the stored fields.
    """

    received: np.ndarray       # (3 slots, 2 receivers) complex
    rx1_system: np.ndarray     # over (x2(2), x1(2))
    rx1_observations: np.ndarray
    rx1_residual: complex
    rx2_system: np.ndarray     # over (x1(1), x2(1))
    rx2_observations: np.ndarray
    rx2_residual: complex
    mirrored: bool = False


def _noise(rng, noise, shape):
    if noise is not None:
        z = np.asarray(noise, dtype=complex)
        if z.shape != shape:
            raise ValueError(f"noise must have shape {shape}, got {z.shape}")
        return z
    if rng is None:
        raise ValueError("either rng or explicit noise draws are required")
    return complex_noise(rng, shape)


def co1_simulate(h1: ChannelMatrix, h2: ChannelMatrix, P: float,
                 x: Sequence[complex], rng: Optional[np.random.Generator] = None,
                 noise=None) -> Co1Trace:
    """Run one pair instance: slot 1 in topology z1, slot 2 in topology z2.

    x holds the three unit-power symbols (x1(1), x2(1), x1(2)).  Noise is
    drawn from rng unless a (2, 2) array of per-(slot, receiver) draws is
    injected.
    """
    if h1.h22 == 0:
        raise SingularCancellationError("h22(1) = 0: cannot cancel the slot-1 symbol")
    x1, x2, x3 = (complex(v) for v in x)
    s = math.sqrt(P)
    z = _noise(rng, noise, (2, 2))

    y = np.empty((2, 2), dtype=complex)
    y[0, 0] = s * (h1.h11 * x1 + h1.h12 * x2) + z[0, 0]   # z1: Rx1 hears both
    y[0, 1] = s * h1.h22 * x2 + z[0, 1]                   # z1: Rx2 hears Tx2
    y[1, 0] = s * h2.h12 * x2 + z[1, 0]                   # z2: Rx1 hears Tx2
    y[1, 1] = s * (h2.h21 * x3 + h2.h22 * x2) + z[1, 1]   # z2: Rx2 hears both

    residual = y[1, 1] - (h2.h22 / h1.h22) * y[0, 1]
    eff_snr = abs(h2.h21) ** 2 * P / (1.0 + abs(h2.h22) ** 2 / abs(h1.h22) ** 2)
    v = np.array([[h1.h11, h1.h12], [0.0, h2.h12]])
    return Co1Trace(
        received=y,
        rx1_system=v,
        rx1_observations=y[:, 0].copy(),
        rx2_residual=complex(residual),
        rx2_effective_snr=float(eff_snr),
    )


def _swap_receivers(h: ChannelMatrix) -> ChannelMatrix:
    return ChannelMatrix(h11=h.h21, h12=h.h22, h21=h.h11, h22=h.h12)


def co2_simulate(h1: ChannelMatrix, h2: ChannelMatrix, h3: ChannelMatrix, P: float,
                 x: Sequence[complex], rng: Optional[np.random.Generator] = None,
                 noise=None, mirrored: bool = False) -> Co2Trace:
    """Run one triple instance: slots in topologies z2, z4, f in order.

    x holds the four unit-power symbols (x1(1), x2(1), x1(2), x2(2)); slot 3
    repeats x1(2) and x2(1).  With ``mirrored`` the slots are {z1, z3, f}:
    the same scheme with the two receiver labels swapped.
    """
    if mirrored:
        h1, h2, h3 = (_swap_receivers(h) for h in (h1, h2, h3))
    if h1.h12 == 0:
        raise SingularCancellationError("h12(1) = 0: receiver 1 cannot cancel")
    if h2.h21 == 0:
        raise SingularCancellationError("h21(2) = 0: receiver 2 cannot cancel")
    x1, x2, x3, x4 = (complex(v) for v in x)
    s = math.sqrt(P)
    z = _noise(rng, noise, (3, 2))

    y = np.empty((3, 2), dtype=complex)
    y[0, 0] = s * h1.h12 * x2 + z[0, 0]                     # z2: Rx1 hears Tx2
    y[0, 1] = s * (h1.h21 * x1 + h1.h22 * x2) + z[0, 1]     # z2: Rx2 hears both
    y[1, 0] = s * (h2.h11 * x3 + h2.h12 * x4) + z[1, 0]     # z4: Rx1 hears both
    y[1, 1] = s * h2.h21 * x3 + z[1, 1]                     # z4: Rx2 hears Tx1
    y[2, 0] = s * (h3.h11 * x3 + h3.h12 * x2) + z[2, 0]     # f: repeats x3, x2
    y[2, 1] = s * (h3.h21 * x3 + h3.h22 * x2) + z[2, 1]

    rx1_res = y[2, 0] - (h3.h12 / h1.h12) * y[0, 0]
    rx2_res = y[2, 1] - (h3.h21 / h2.h21) * y[1, 1]
    u1 = np.array([[h2.h12, h2.h11], [0.0, h3.h11]])   # rows: Y1(2), residual
    u2 = np.array([[h1.h21, h1.h22], [0.0, h3.h22]])   # rows: Y2(1), residual
    return Co2Trace(
        received=y,
        rx1_system=u1,
        rx1_observations=np.array([y[1, 0], rx1_res]),
        rx1_residual=complex(rx1_res),
        rx2_system=u2,
        rx2_observations=np.array([y[0, 1], rx2_res]),
        rx2_residual=complex(rx2_res),
        mirrored=mirrored,
    )


def reconstruction_residual(h_main: ChannelMatrix, h_virtual: Sequence[complex],
                            noises: Sequence[complex],
                            x: Sequence[complex] = (0.0, 0.0),
                            P: float = 1.0, z4: bool = False) -> complex:
    """Residual of reconstructing receiver 2 from receiver 1 plus its virtual twin.

    The slot is in topology z1 (or z4 with the flag set).  h_virtual holds
    the two virtual-receiver coefficients, noises the three draws
    (Z1, Z1-virtual, Z2).  The returned residual is free of the transmitted
    symbols, hence independent of x and P.
    """
    hv1, hv2 = (complex(v) for v in h_virtual)
    z1, zv, z2 = (complex(v) for v in noises)
    x1, x2 = (complex(v) for v in x)
    s = math.sqrt(P)

    m = np.array([[h_main.h11, h_main.h12], [hv1, hv2]])
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0:
        raise SingularCancellationError("direct/virtual coefficient matrix is singular")
    row = np.array([h_main.h21, 0.0]) if z4 else np.array([0.0, h_main.h22])

    y1 = s * (h_main.h11 * x1 + h_main.h12 * x2) + z1
    yv = s * (hv1 * x1 + hv2 * x2) + zv
    y2 = (s * h_main.h21 * x1 + z2) if z4 else (s * h_main.h22 * x2 + z2)
    recon = row @ np.linalg.solve(m, np.array([y1, yv]))
    return complex(y2 - recon)


# ---------------------------------------------------------------------------
# Monte Carlo estimation of the rate terms

@dataclass(frozen=True)
class RateTerms:
    """The six ergodic scalars (bits/use) with their MC standard errors."""

    a: float
    b: float
    c: float
    d: float
    e: Optional[float]
    f: Optional[float]
    se: dict[str, float]
    power: float
    model: Optional[FadingModel] = None

    def term(self, name: str) -> float:
        v = getattr(self, name)
        if v is None:
            raise ValueError(f"rate term {name!r} was not computed")
        return v


def _integrands(model: FadingModel, P: float, m: int, rng: np.random.Generator):
    """Per-sample values of the six integrands for one chunk of m samples."""
    # a full set of three slot matrices plus the virtual pair is drawn per
    # sample so the stream layout stays fixed even where a term needs less
    h = model.sample(rng, (14, m))
    (h11_1, h12_1, _h21_1, h22_1,
     h11_2, h12_2, h21_2, h22_2,
     h11_3, h12_3, _h21_3, _h22_3,
     hv1, hv2) = h

    p11 = np.abs(h11_1) ** 2
    p12 = np.abs(h12_1) ** 2
    p22 = np.abs(h22_1) ** 2
    if np.any(p22 == 0) or np.any(p12 == 0) or np.any(np.abs(h21_2) == 0):
        raise SingularCancellationError("drew an exactly-zero cancellation coefficient")

    a = np.log2(1.0 + p11 * P)
    b = np.log2(1.0 + (p11 + p12) * P)
    c = co1_rx1_rate(h11_1, h12_1, h12_2, P) + co1_rx2_rate(h22_1, h21_2, h22_2, P)
    d = 2.0 * co2_rx1_rate(h12_1, h11_2, h12_2, h11_3, h12_3, P)
    # denominator written as |h11 hv2 - h12 hv1|^2: algebraically identical to
    # the expanded cross-term form but immune to cancellation at the float level
    den = np.abs(h11_1 * hv2 - h12_1 * hv1) ** 2
    if np.any(den == 0):
        raise SingularCancellationError("virtual reconstruction matrix is singular")
    e = np.log2(1.0 + p22 * (p11 + np.abs(hv1) ** 2) / den)
    f = np.log2(1.0 + p12 / p22)
    return a, b, c, d, e, f


_CHUNK = 1 << 17


def estimate_rate_terms(model: FadingModel, P: float, n_mc: int,
                        rng: np.random.Generator, n_jobs: int = 4) -> RateTerms:
    """Monte Carlo means of the six rate-term integrands at power P.

    Samples are split into fixed-size chunks, each driven by its own child
    stream spawned from ``rng``, so the result depends only on the seed and
    n_mc (not on the number of workers).
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")
    if P <= 0:
        raise ValueError(f"power must be positive, got {P}")
    root = int(rng.integers(0, 2**63 - 1))
    sizes = [_CHUNK] * (n_mc // _CHUNK)
    if n_mc % _CHUNK:
        sizes.append(n_mc % _CHUNK)

    def run_chunk(args):
        k, m = args
        child = np.random.default_rng([root, k])
        vals = _integrands(model, P, m, child)
        return [(v.sum(), np.square(v).sum()) for v in vals]

    if len(sizes) > 1 and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            partials = list(pool.map(run_chunk, enumerate(sizes)))
    else:
        partials = [run_chunk(arg) for arg in enumerate(sizes)]

    sums = np.zeros(6)
    sqs = np.zeros(6)
    for part in partials:  # fixed chunk order keeps the reduction deterministic
        for i, (s, q) in enumerate(part):
            sums[i] += s
            sqs[i] += q
    means = sums / n_mc
    var = np.maximum(sqs / n_mc - means**2, 0.0)
    ses = np.sqrt(var / n_mc)
    se = dict(zip(TERM_NAMES, (float(v) for v in ses)))
    return RateTerms(a=float(means[0]), b=float(means[1]), c=float(means[2]),
                     d=float(means[3]), e=float(means[4]), f=float(means[5]),
                     se=se, power=P, model=model)


def closed_form_uniform_phase(P: float) -> RateTerms:
    """Exact A, B, C, D for unit-modulus fading (no Monte Carlo needed)."""
    if P <= 0:
        raise ValueError(f"power must be positive, got {P}")
    a = math.log2(1.0 + P)
    b = math.log2(1.0 + 2.0 * P)
    c = math.log2(1.0 + P / 2.0) + math.log2(P * P + 3.0 * P + 1.0)
    d = 2.0 * math.log2(P * P / 2.0 + 5.0 * P / 2.0 + 1.0)
    se = {name: 0.0 for name in TERM_NAMES}
    return RateTerms(a=a, b=b, c=c, d=d, e=None, f=None, se=se, power=P,
                     model=FadingModel.uniform_phase())
