"""Closed-form retrieval rates, capacities and gaps, plus the fading partition
optimizer.

All rates are in bits per real channel use (base-2 logs, no complex-channel
doubling). Noise variance is normalized to 1 throughout, so SNR is set by the
per-server power alone.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

#: Largest server count for which the partition search is exhaustive.
EXHAUSTIVE_PARTITION_LIMIT = 16


def _log2_pos(x: float) -> float:
    """log2 clamped at zero: max(log2(x), 0)."""
    return math.log2(x) if x > 1.0 else 0.0


@dataclass(frozen=True)
class OperatingPoint:
    """One (N, M, P) system configuration, optionally with channel gains."""

    n_servers: int
    n_messages: int
    power: float
    gains: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_servers < 2:
            raise ValueError("need at least 2 servers")
        if self.n_messages < 1:
            raise ValueError("need at least 1 message")
        if not self.power > 0:
            raise ValueError("power must be positive")
        if self.gains is not None and len(self.gains) != self.n_servers:
            raise ValueError("gains must have one entry per server")


@dataclass(frozen=True)
class RateReport:
    """Named rate values at one operating point, in bits per channel use."""

    joint: float
    separation: float
    miso_capacity: float
    gap: float
    chosen: str


@dataclass(frozen=True)
class PartitionResult:
    """A balanced split of the servers into two transmit sets (1-based ids)."""

    set1: tuple[int, ...]
    set2: tuple[int, ...]
    rate: float
    exact: bool


def alpha_mmse(gains, int_coeffs, power: float, noise_var: float = 1.0) -> float:
    """MMSE receiver scaling for decoding the integer combination int_coeffs.

    noise_var=0 gives the zero-noise limit h.a / ||h||^2, the scaling that
    minimizes the self-noise alone.
    """
    h = np.asarray(gains, dtype=float)
    a = np.asarray(int_coeffs, dtype=float)
    return float(power * (h @ a) / (noise_var + power * (h @ h)))


def cf_rate_closed(gains, int_coeffs, power: float) -> float:
    """Computation rate for an integer combination under MMSE scaling.

    Evaluates (1/2) log2+ of (1 + P||h||^2) / (||a||^2 + P(||a||^2 ||h||^2 - (h.a)^2)).
    """
    h = np.asarray(gains, dtype=float)
    a = np.asarray(int_coeffs, dtype=float)
    if not np.any(a):
        raise ValueError("integer coefficient vector must be nonzero")
    hh = float(h @ h)
    aa = float(a @ a)
    ha = float(h @ a)
    denom = aa + power * (aa * hh - ha * ha)
    return 0.5 * _log2_pos((1.0 + power * hh) / denom)


def cf_rate_numeric(gains, int_coeffs, power: float, tol: float = 1e-10) -> float:
    """Computation rate via direct search over the receiver scaling.

    Independent of the closed form: golden-section minimization of the
    effective-noise power alpha^2 + P ||alpha h - a||^2, which is a convex
    quadratic in alpha. Its minimizer is bounded by P ||h|| ||a|| / (1 + P ||h||^2)
    (Cauchy-Schwarz on the vertex), so [-A, A] with one unit of padding brackets it.
    """
    h = np.asarray(gains, dtype=float)
    a = np.asarray(int_coeffs, dtype=float)
    if not np.any(a):
        raise ValueError("integer coefficient vector must be nonzero")

    def noise_power(alpha: float) -> float:
        diff = alpha * h - a
        return alpha * alpha + power * float(diff @ diff)

    norm_h = float(np.linalg.norm(h))
    norm_a = float(np.linalg.norm(a))
    half_width = power * norm_h * norm_a / (1.0 + power * norm_h**2) + 1.0
    lo, hi = -half_width, half_width
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = noise_power(x1), noise_power(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = noise_power(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = noise_power(x2)
    best = min(f1, f2)
    return 0.5 * _log2_pos(power / best)


def coeffs_admissible(gains, int_coeffs, power: float) -> bool:
    """Whether ||a||^2 <= 1 + P ||h||^2, the condition for a nonzero rate."""
    h = np.asarray(gains, dtype=float)
    a = np.asarray(int_coeffs, dtype=float)
    return float(a @ a) <= 1.0 + power * float(h @ h)


def pir_capacity(n_servers: int, n_messages: int) -> float:
    """Retrieval capacity of the classical noiseless-link problem."""
    if n_servers < 2:
        raise ValueError("need at least 2 servers")
    inv = 1.0 / n_servers
    return (1.0 - inv) / (1.0 - inv**n_messages)


def separation_rate(n_servers: int, n_messages: int, power: float) -> float:
    """Retrieval rate when channel coding and retrieval are designed apart.

    The sum capacity (1/2) log2(1 + NP) emulates noiseless orthogonal links,
    then the classical scheme runs on top at its capacity.
    """
    return pir_capacity(n_servers, n_messages) * 0.5 * math.log2(1.0 + n_servers * power)


def joint_rate_awgn(n_servers: int, power: float) -> float:
    """Joint lattice-coded retrieval rate on the unfaded channel.

    Pairs of servers transmit identical codeword pairs, so the receiver sees
    floor(N/2) * (x1 + x2) and decodes one sum at
    (1/2) log2+ (1/2 + floor(N/2)^2 P).
    """
    if n_servers < 2:
        raise ValueError("need at least 2 servers")
    pairs = n_servers // 2
    return 0.5 * _log2_pos(0.5 + pairs * pairs * power)


def miso_capacity(gains, power: float) -> float:
    """No-privacy benchmark: per-antenna-power MISO sum capacity (1/2) log2(1 + P (sum h)^2)."""
    total = float(np.sum(np.asarray(gains, dtype=float)))
    return 0.5 * math.log2(1.0 + power * total * total)


def capacity_gap(n_servers: int, power: float) -> float:
    """Distance from the unfaded no-privacy capacity to the joint rate, in bits.

    Defined only where the joint rate is positive; returns NaN otherwise so
    zero-rate operating points surface explicitly instead of hiding in a 0.
    """
    joint = joint_rate_awgn(n_servers, power)
    if joint <= 0.0:
        return math.nan
    full = 0.5 * math.log2(1.0 + n_servers * n_servers * power)
    return full - joint


def best_rate(n_servers: int, n_messages: int, power: float) -> RateReport:
    """Compare separation and joint rates; ties go to the joint scheme."""
    sep = separation_rate(n_servers, n_messages, power)
    joint = joint_rate_awgn(n_servers, power)
    miso = 0.5 * math.log2(1.0 + (n_servers * n_servers) * power)
    chosen = "joint" if joint >= sep else "separation"
    return RateReport(
        joint=joint,
        separation=sep,
        miso_capacity=miso,
        gap=capacity_gap(n_servers, power),
        chosen=chosen,
    )


def sign_match_coeffs(gains2) -> np.ndarray:
    """Unit-magnitude integer coefficients matching the signs of a 2-gain channel.

    A zero gain ties to +1; under the continuous fading model that is a
    probability-zero event.
    """
    h = np.asarray(gains2, dtype=float)
    if h.shape != (2,):
        raise ValueError("expected exactly two channel gains")
    return np.where(h < 0.0, -1, 1).astype(np.int64)


def joint_rate_fading2(gains2, power: float) -> float:
    """Joint retrieval rate for two effective gains under block fading.

    Equals the computation rate of the sign-matched unit combination:
    (1/2) log2+ ((1 + P ||h||^2) / (2 + P(|h1| - |h2|)^2)). With gains (1, 1)
    this reduces to the unfaded two-server rate.
    """
    h = np.asarray(gains2, dtype=float)
    if h.shape != (2,):
        raise ValueError("expected exactly two channel gains")
    num = 1.0 + power * float(h @ h)
    den = 2.0 + power * (abs(h[0]) - abs(h[1])) ** 2
    return 0.5 * _log2_pos(num / den)


def _balanced_partitions(n_servers: int):
    """Yield (set1, set2) over all unordered balanced splits, 1-based, lexicographic.

    For odd N each choice of the left-out server is enumerated. The first used
    server is pinned to set1, which halves the count; for N=16 this gives
    C(15,7) = 6435 candidates.
    """
    half = n_servers // 2
    servers = tuple(range(1, n_servers + 1))
    if n_servers % 2 == 0:
        first, rest = servers[0], servers[1:]
        for extra in itertools.combinations(rest, half - 1):
            set1 = (first,) + extra
            set2 = tuple(s for s in rest if s not in extra)
            yield set1, set2
    else:
        for out in servers:
            used = tuple(s for s in servers if s != out)
            first, rest = used[0], used[1:]
            for extra in itertools.combinations(rest, half - 1):
                set1 = (first,) + extra
                set2 = tuple(s for s in rest if s not in extra)
                yield set1, set2


def _differencing_partition(gains: np.ndarray) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Greedy largest-magnitude-first split balancing the two set sums."""
    n = len(gains)
    half = n // 2
    order = sorted(range(n), key=lambda i: abs(gains[i]), reverse=True)
    used = order[: 2 * half]
    set1: list[int] = []
    set2: list[int] = []
    sum1 = sum2 = 0.0
    for idx in used:
        room1 = len(set1) < half
        room2 = len(set2) < half
        if room1 and (not room2 or abs(sum1 + gains[idx]) <= abs(sum2 + gains[idx])):
            set1.append(idx)
            sum1 += gains[idx]
        else:
            set2.append(idx)
            sum2 += gains[idx]
    return tuple(sorted(i + 1 for i in set1)), tuple(sorted(i + 1 for i in set2))


def optimize_partition(gains, power: float) -> PartitionResult:
    """Split the servers into two equal-size sets maximizing the fading rate.

    Exhaustive (hence exact) up to EXHAUSTIVE_PARTITION_LIMIT servers with a
    deterministic lexicographic tie-break; beyond that a greedy differencing
    heuristic is used and the result is flagged exact=False.
    """
    h = np.asarray(gains, dtype=float)
    n = len(h)
    if n < 2:
        raise ValueError("need at least 2 servers")

    def aggregated(set1, set2):
        return np.array([h[[s - 1 for s in set1]].sum(), h[[s - 1 for s in set2]].sum()])

    if n <= EXHAUSTIVE_PARTITION_LIMIT:
        best: PartitionResult | None = None
        for set1, set2 in _balanced_partitions(n):
            rate = joint_rate_fading2(aggregated(set1, set2), power)
            if best is None or rate > best.rate:
                best = PartitionResult(set1, set2, rate, exact=True)
        assert best is not None
        return best

    set1, set2 = _differencing_partition(h)
    rate = joint_rate_fading2(aggregated(set1, set2), power)
    return PartitionResult(set1, set2, rate, exact=False)
