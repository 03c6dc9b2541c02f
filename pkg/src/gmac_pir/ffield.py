"""Exact arithmetic over a prime field and the message containers built on it.

Residues are kept as canonical representatives in [0, p). Signed integer
coefficients (a -1 in a query vector, say) are reduced mod p before they touch
a message, so every value has a single normal form and there is no sign
ambiguity anywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def is_prime(n: int) -> bool:
    """Deterministic trial-division primality check; moduli here are desk-scale."""
    if n < 2:
        return False
    for f in (2, 3):
        if n % f == 0:
            return n == f
    f = 5
    while f * f <= n:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field of integers mod a prime p, elements stored in [0, p)."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"field modulus must be prime, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))

    def reduce(self, values) -> np.ndarray:
        """Map arbitrary integers to their canonical residues."""
        return np.asarray(values, dtype=np.int64) % self.p


def _as_readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=np.int64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Message:
    """A fixed-length vector of field symbols, one stored record."""

    symbols: np.ndarray
    field: PrimeField

    def __post_init__(self):
        sym = _as_readonly(np.atleast_1d(self.symbols))
        if sym.ndim != 1 or sym.size == 0:
            raise ValueError("message symbols must form a non-empty vector")
        if np.any((sym < 0) | (sym >= self.field.p)):
            raise ValueError(f"symbols must lie in [0, {self.field.p})")
        object.__setattr__(self, "symbols", sym)

    def __len__(self) -> int:
        return int(self.symbols.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Message)
            and self.field == other.field
            and np.array_equal(self.symbols, other.symbols)
        )

    def is_zero(self) -> bool:
        return not np.any(self.symbols)


@dataclass(frozen=True, eq=False)
class MessageStore:
    """The replicated database: M messages of equal length over one field."""

    messages: tuple[Message, ...]

    def __post_init__(self):
        msgs = tuple(self.messages)
        if not msgs:
            raise ValueError("a store needs at least one message")
        field, length = msgs[0].field, len(msgs[0])
        for m in msgs[1:]:
            if m.field != field:
                raise ValueError("all messages must share one field")
            if len(m) != length:
                raise ValueError("all messages must share one length")
        object.__setattr__(self, "messages", msgs)

    @property
    def field(self) -> PrimeField:
        return self.messages[0].field

    @property
    def n_messages(self) -> int:
        return len(self.messages)

    @property
    def msg_len(self) -> int:
        return len(self.messages[0])

    def matrix(self) -> np.ndarray:
        """All symbols as an (M, L) array."""
        return np.stack([m.symbols for m in self.messages])

    def __getitem__(self, index: int) -> Message:
        return self.messages[index]


def sample_store(seed, n_messages: int, msg_len: int, prime: int) -> MessageStore:
    """Draw M length-L messages with i.i.d. uniform symbols; deterministic per seed."""
    field = PrimeField(prime)
    if n_messages < 1:
        raise ValueError("n_messages must be at least 1")
    if msg_len < 1:
        raise ValueError("msg_len must be at least 1")
    rng = np.random.default_rng(seed)
    mat = rng.integers(0, field.p, size=(n_messages, msg_len), dtype=np.int64)
    return MessageStore(tuple(Message(row, field) for row in mat))


def linear_combine(store: MessageStore, coeffs) -> Message:
    """Symbolwise sum of coeffs[m] * W_m with everything reduced mod p.

    Coefficients may be arbitrary integers (signed query entries included);
    each is reduced to its canonical residue first.
    """
    coeffs = np.asarray(coeffs, dtype=np.int64)
    if coeffs.shape != (store.n_messages,):
        raise ValueError(
            f"need exactly {store.n_messages} coefficients, got shape {coeffs.shape}"
        )
    p = store.field.p
    combined = ((coeffs % p) @ store.matrix()) % p
    return Message(combined, store.field)


def add(x: Message, y: Message) -> Message:
    """Componentwise sum in the common field."""
    if x.field != y.field:
        raise ValueError("cannot add messages from different fields")
    if len(x) != len(y):
        raise ValueError("cannot add messages of different lengths")
    return Message((x.symbols + y.symbols) % x.field.p, x.field)


def negate(x: Message) -> Message:
    """Componentwise additive inverse."""
    return Message((-x.symbols) % x.field.p, x.field)


def zero_message(field: PrimeField, msg_len: int) -> Message:
    return Message(np.zeros(msg_len, dtype=np.int64), field)
