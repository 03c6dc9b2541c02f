"""Query generation, server answers, the pairing plan, and the privacy audit.

The user draws a uniform selection mask b and a uniform sign s, then queries
one server role with s*b and the other with -s*(b xor e_i). Each server's view
is a {-1, 0, +1} vector whose distribution does not depend on the private
index; the audit below certifies that, exactly, by enumeration.

Message and server indices are 1-based at this boundary, matching the usual
presentation of the retrieval problem.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .ffield import Message, MessageStore, linear_combine, negate
from .rates import optimize_partition

#: Largest message count for which the privacy audit enumerates exhaustively.
EXHAUSTIVE_PRIVACY_LIMIT = 12


@dataclass(frozen=True, eq=False)
class QueryPair:
    """The two query vectors for one retrieval, plus the user-side secrets."""

    sign: int
    mask: np.ndarray
    index: int
    q1: np.ndarray
    q2: np.ndarray

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        mask = np.asarray(self.mask, dtype=np.int64)
        m = mask.size
        if not 1 <= self.index <= m:
            raise ValueError(f"index {self.index} out of range [1, {m}]")
        if np.any((mask != 0) & (mask != 1)):
            raise ValueError("mask entries must be bits")
        for arr in (mask, np.asarray(self.q1), np.asarray(self.q2)):
            arr.setflags(write=False)


def queries_from(mask, sign: int, index: int) -> QueryPair:
    """Build the deterministic query pair for given mask, sign and index."""
    mask = np.asarray(mask, dtype=np.int64)
    flipped = mask.copy()
    flipped[index - 1] ^= 1
    q1 = sign * mask
    q2 = -sign * flipped
    return QueryPair(sign=sign, mask=mask, index=index, q1=q1, q2=q2)


def make_queries(seed, n_messages: int, index: int) -> QueryPair:
    """Sample the mask i.i.d. Bernoulli(1/2) and the sign uniform on {+1, -1}."""
    if not 1 <= index <= n_messages:
        raise ValueError(f"index {index} out of range [1, {n_messages}]")
    rng = np.random.default_rng(seed)
    mask = rng.integers(0, 2, size=n_messages, dtype=np.int64)
    sign = 1 if rng.integers(0, 2) == 0 else -1
    return queries_from(mask, sign, index)


@dataclass(frozen=True, eq=False)
class ServerAnswer:
    """One server's finite-field combination of its stored messages."""

    payload: Message
    server_id: int = 0


def answer(store: MessageStore, query, server_id: int = 0) -> ServerAnswer:
    """Form the answer sum(query[m] * W_m) mod p; deterministic in (store, query)."""
    return ServerAnswer(payload=linear_combine(store, query), server_id=server_id)


def recover_message(decoded_sum: Message, sign: int) -> Message:
    """Undo the query sign: the decoded combination equals sign * W_i.

    Since sign is +1 or -1 it is its own inverse mod p.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    return decoded_sum if sign == 1 else negate(decoded_sum)


@dataclass(frozen=True, eq=False)
class PairingPlan:
    """Which servers play which of the two query roles (1-based server ids)."""

    mode: str
    pairs: tuple[tuple[int, int], ...] = ()
    set1: tuple[int, ...] = ()
    set2: tuple[int, ...] = ()
    unused: tuple[int, ...] = ()

    def __post_init__(self):
        role1, role2 = self.role_servers()
        seen = role1 + role2 + self.unused
        if len(set(seen)) != len(seen):
            raise ValueError("a server may appear in only one role")

    def role_servers(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Servers receiving the first and the second query, respectively."""
        if self.mode == "awgn":
            return tuple(p[0] for p in self.pairs), tuple(p[1] for p in self.pairs)
        return self.set1, self.set2


def plan_servers(n_servers: int, mode: str, gains=None, power: float = 1.0) -> PairingPlan:
    """Assign servers to the two query roles.

    Unfaded mode pairs servers in order, ignoring the last one when N is odd.
    Fading mode delegates to the exhaustive partition optimizer, which needs
    the channel gains and the operating power.
    """
    if n_servers < 2:
        raise ValueError("need at least 2 servers")
    if mode == "awgn":
        pairs = tuple((2 * i + 1, 2 * i + 2) for i in range(n_servers // 2))
        unused = (n_servers,) if n_servers % 2 else ()
        return PairingPlan(mode=mode, pairs=pairs, unused=unused)
    if mode == "fading":
        if gains is None or len(gains) != n_servers:
            raise ValueError("fading mode needs one channel gain per server")
        part = optimize_partition(gains, power)
        used = set(part.set1) | set(part.set2)
        unused = tuple(s for s in range(1, n_servers + 1) if s not in used)
        return PairingPlan(mode=mode, set1=part.set1, set2=part.set2, unused=unused)
    raise ValueError(f"unknown mode {mode!r}")


# --- privacy audit ---------------------------------------------------------

def honest_query_builder(masks: np.ndarray, signs: np.ndarray, index: int):
    """Vectorized view builder for the real scheme: rows of (q1, q2)."""
    q1 = signs[:, None] * masks
    flipped = masks.copy()
    flipped[:, index - 1] ^= 1
    q2 = -signs[:, None] * flipped
    return q1, q2


def leaky_query_builder(masks: np.ndarray, signs: np.ndarray, index: int):
    """Negative control: the second query exposes the selector directly."""
    q1 = signs[:, None] * masks
    q2 = np.zeros_like(masks)
    q2[:, index - 1] = -signs
    return q1, q2


@dataclass(frozen=True)
class PrivacyReport:
    """Exact (or sampled) distribution comparison of server views across indices."""

    n_messages: int
    mode: str
    max_tv_server1: float
    max_tv_server2: float
    value_sign_uniform: bool | None
    magnitude_uniform: bool | None
    trials: int | None = None
    sampling_bound: float | None = None

    @property
    def max_tv(self) -> float:
        return max(self.max_tv_server1, self.max_tv_server2)

    def leak_detected(self) -> bool:
        bound = self.sampling_bound or 0.0
        return self.max_tv > bound


def _tv_between_counts(counts_a: Counter, counts_b: Counter, total: int) -> float:
    keys = counts_a.keys() | counts_b.keys()
    diff = sum(abs(counts_a.get(k, 0) - counts_b.get(k, 0)) for k in keys)
    return diff / (2.0 * total)


def _all_masks(n_messages: int) -> np.ndarray:
    bits = np.array(list(itertools.product((0, 1), repeat=n_messages)), dtype=np.int64)
    return bits


def verify_privacy(
    n_messages: int,
    view_builder=None,
    *,
    mode: str = "exhaustive",
    trials: int = 10**6,
    seed=0,
) -> PrivacyReport:
    """Compare each server's query distribution across all private indices.

    Exhaustive mode enumerates every (mask, sign) realization and reports the
    exact maximum total-variation distance between the per-index view
    distributions (integer arithmetic; an honest scheme gives exactly 0). It
    also checks that every observed (query, sign) pattern carries mass
    2^-(M+1) and every magnitude pattern mass 2^-M.

    Monte Carlo mode draws `trials` realizations per index and compares the
    empirical distributions; the reported sampling bound is
    1.5 * sqrt(2^M / trials), from E[TV] <= sqrt(2^(M+1) K)/(2 sqrt(trials K))
    via Cauchy-Schwarz over the K ~ 2^(M+1) outcomes plus concentration slack.
    """
    if view_builder is None:
        view_builder = honest_query_builder
    if n_messages < 1:
        raise ValueError("need at least one message")

    if mode == "exhaustive":
        if n_messages > EXHAUSTIVE_PRIVACY_LIMIT:
            raise ValueError(
                f"exhaustive audit supports M <= {EXHAUSTIVE_PRIVACY_LIMIT}; "
                "use mode='monte-carlo'"
            )
        masks = _all_masks(n_messages)
        masks = np.repeat(masks, 2, axis=0)
        signs = np.tile(np.array([1, -1], dtype=np.int64), masks.shape[0] // 2)
        total = masks.shape[0]  # 2^(M+1)

        per_index: list[tuple[Counter, Counter]] = []
        value_sign_uniform = True
        magnitude_uniform = True
        for index in range(1, n_messages + 1):
            q1, q2 = view_builder(masks.copy(), signs, index)
            counters = []
            for q in (q1, q2):
                rows = [tuple(row) for row in q]
                counters.append(Counter(rows))
                joint = Counter(zip(rows, signs.tolist()))
                if any(c != 1 for c in joint.values()):
                    value_sign_uniform = False
                mags = Counter(tuple(abs(v) for v in row) for row in rows)
                if len(mags) != 2**n_messages or any(c != 2 for c in mags.values()):
                    magnitude_uniform = False
            per_index.append((counters[0], counters[1]))

        tv1 = 0.0
        tv2 = 0.0
        for (a1, a2), (b1, b2) in itertools.combinations(per_index, 2):
            tv1 = max(tv1, _tv_between_counts(a1, b1, total))
            tv2 = max(tv2, _tv_between_counts(a2, b2, total))
        return PrivacyReport(
            n_messages=n_messages,
            mode=mode,
            max_tv_server1=tv1,
            max_tv_server2=tv2,
            value_sign_uniform=value_sign_uniform,
            magnitude_uniform=magnitude_uniform,
        )

    if mode == "monte-carlo":
        rng = np.random.default_rng(seed)
        per_index = []
        for index in range(1, n_messages + 1):
            masks = rng.integers(0, 2, size=(trials, n_messages), dtype=np.int64)
            signs = rng.choice(np.array([1, -1], dtype=np.int64), size=trials)
            q1, q2 = view_builder(masks, signs, index)
            per_index.append(
                (
                    Counter(map(tuple, q1.tolist())),
                    Counter(map(tuple, q2.tolist())),
                )
            )
        tv1 = 0.0
        tv2 = 0.0
        for (a1, a2), (b1, b2) in itertools.combinations(per_index, 2):
            tv1 = max(tv1, _tv_between_counts(a1, b1, trials))
            tv2 = max(tv2, _tv_between_counts(a2, b2, trials))
        bound = 1.5 * float(np.sqrt(2.0**n_messages / trials))
        return PrivacyReport(
            n_messages=n_messages,
            mode=mode,
            max_tv_server1=tv1,
            max_tv_server2=tv2,
            value_sign_uniform=None,
            magnitude_uniform=None,
            trials=trials,
            sampling_bound=bound,
        )

    raise ValueError(f"unknown mode {mode!r}")
