"""Lacunary sequences theta = (k_r) with k_0 = 0 and their block arithmetic.

Block r is I_r = (k_{r-1}, k_r] with length h_r = k_r - k_{r-1} and ratio
q_r = k_r / k_{r-1}.  Terms are Python ints so that super-exponential
sequences stay exact.
"""
from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .errors import BadParams, NotIncreasing, NotLacunary

LACUNARY_CHECK_BLOCKS = 200
LACUNARY_MIN_LENGTH = 10


def _geometric_terms(rho: float) -> Iterator[int]:
    # exact powers of the binary value of rho, so large m neither overflows nor rounds
    step = Fraction(rho)
    power = Fraction(1)
    last = 0
    while True:
        power *= step
        k = -(-power.numerator // power.denominator)
        if k > last:
            last = k
            yield k


def _polynomial_terms(d: int) -> Iterator[int]:
    r = 1
    while True:
        yield r ** d
        r += 1


def _custom_terms(gen: Callable[[int], int]) -> Iterator[int]:
    r = 1
    while True:
        yield int(gen(r))
        r += 1


class LacunaryTheta:
    """A lacunary sequence with a lazily extended, lock-protected prefix."""

    def __init__(self, name: str, kind: str, params: tuple = (),
                 terms: Optional[Sequence[int]] = None,
                 generator: Optional[Callable[[int], int]] = None):
        self.name = name
        self.kind = kind
        self.params = tuple(params)
        self._lock = threading.Lock()
        self._ks = [0]
        self._finite = False
        if kind == "Geometric":
            (rho,) = self.params
            if not rho > 1:
                raise BadParams(f"Geometric ratio must exceed 1, got {rho}")
            self._source = _geometric_terms(float(rho))
        elif kind == "Polynomial":
            (d,) = self.params
            if int(d) != d or d < 2:
                raise BadParams(f"Polynomial degree must be an integer >= 2, got {d}")
            self._source = _polynomial_terms(int(d))
        elif kind == "Explicit":
            if not terms:
                raise BadParams("Explicit theta needs a non-empty term list")
            self._source = iter(int(k) for k in terms)
            self._finite = True
        elif kind == "Custom":
            if generator is None:
                raise BadParams("Custom theta needs a generator")
            self._source = _custom_terms(generator)
        else:
            raise BadParams(f"unknown theta kind {kind!r}")

    def __repr__(self):
        return f"LacunaryTheta({self.name!r}, {self.kind}, {self.params})"

    # -- cache ---------------------------------------------------------

    def _pull(self, count: int) -> None:
        for _ in range(count):
            try:
                k = next(self._source)
            except StopIteration:
                return
            if k <= self._ks[-1]:
                raise NotIncreasing(f"{self.name}: term {k} after {self._ks[-1]}")
            self._ks.append(k)

    def _ensure(self, r: int) -> None:
        if r < len(self._ks):
            return
        with self._lock:
            while r >= len(self._ks):
                before = len(self._ks)
                self._pull(max(r + 1 - before, before))
                if len(self._ks) == before:
                    raise IndexError(f"{self.name}: only {before - 1} blocks available")

    def _ensure_value(self, n: int) -> None:
        while self._ks[-1] < n:
            self._ensure(2 * len(self._ks))

    @property
    def available(self) -> Optional[int]:
        """Number of blocks for a finite (Explicit) theta, else None."""
        if not self._finite:
            return None
        with self._lock:
            self._pull(10**9)
        return len(self._ks) - 1

    # -- arithmetic ----------------------------------------------------

    def k(self, r: int) -> int:
        self._ensure(r)
        return self._ks[r]

    def h(self, r: int) -> int:
        self._ensure(r)
        return self._ks[r] - self._ks[r - 1]

    def q(self, r: int) -> float:
        self._ensure(r)
        prev = self._ks[r - 1]
        # k_0 = 0 makes q_1 undefined; use 1 in its place
        return self._ks[r] / max(prev, 1)

    def terms(self, R: int) -> list:
        self._ensure(R)
        return self._ks[:R + 1]

    def lengths(self, R: int) -> list:
        ks = self.terms(R)
        return [b - a for a, b in zip(ks, ks[1:])]

    def block_of(self, n: int) -> int:
        if n < 1:
            raise ValueError("block_of expects n >= 1")
        self._ensure_value(n)
        return bisect.bisect_left(self._ks, n)

    def blocks_within(self, horizon: int) -> int:
        """Number of complete blocks T with k_T <= horizon."""
        try:
            self._ensure_value(horizon)
        except IndexError:
            pass
        return bisect.bisect_right(self._ks, horizon) - 1

    def blocks_with_length_upto(self, hmax: float, max_blocks: int) -> int:
        """Largest T <= max_blocks with h_t <= hmax for every t <= T."""
        T = 0
        while T < max_blocks:
            try:
                if self.h(T + 1) > hmax:
                    break
            except IndexError:
                break
            T += 1
        return T


def build_lacunary(kind: str, params: tuple = (), name: Optional[str] = None,
                   terms: Optional[Sequence[int]] = None,
                   generator: Optional[Callable[[int], int]] = None) -> LacunaryTheta:
    theta = LacunaryTheta(name or f"{kind}{params}", kind, params, terms, generator)
    n = LACUNARY_CHECK_BLOCKS
    if theta.available is not None:
        n = min(n, theta.available)
    try:
        theta.k(n)
    except IndexError:
        pass
    hs = theta.lengths(min(n, len(theta._ks) - 1))
    if not hs or max(hs) < LACUNARY_MIN_LENGTH:
        raise NotLacunary(f"{theta.name}: block lengths never reach {LACUNARY_MIN_LENGTH} "
                          f"within {len(hs)} blocks")
    return theta


@dataclass(frozen=True)
class BlockStats:
    k_prev: int
    k: int
    h: int
    q: float

    def as_tuple(self):
        return (self.k_prev, self.k, self.h, self.q)


def block_stats(theta: LacunaryTheta, r: int) -> BlockStats:
    if r < 1:
        raise ValueError("block index must be >= 1")
    return BlockStats(theta.k(r - 1), theta.k(r), theta.h(r), theta.q(r))


def in_block(theta: LacunaryTheta, n: int, r: int) -> bool:
    return theta.k(r - 1) < n <= theta.k(r)


@dataclass
class RatioProfile:
    R: int
    liminf_est: float
    limsup_est: float
    unbounded_flag: bool
    h_tail: list

    def as_dict(self) -> dict:
        return {
            "blocks": self.R,
            "h_tail": self.h_tail,
            "liminf_est": self.liminf_est,
            "limsup_est": self.limsup_est,
            "unbounded_flag": self.unbounded_flag,
        }


def _ratio(theta: LacunaryTheta, r: int) -> float:
    a, b = theta.k(r - 1), theta.k(r)
    try:
        return b / a
    except OverflowError:
        return float(Fraction(b, a))


def ratio_profile(theta: LacunaryTheta, R: int) -> RatioProfile:
    """Tail statistics of q_r over blocks R/2..R (ratio statistics start at r = 2)."""
    if R < 10:
        raise BadParams("ratio_profile needs R >= 10")
    avail = theta.available
    if avail is not None:
        R = min(R, avail)
    qs = {r: _ratio(theta, r) for r in range(2, R + 1)}
    tail = [qs[r] for r in range(max(2, R // 2), R + 1)]
    early = [qs[r] for r in range(max(2, R // 4), max(2, R // 2) + 1)]
    unbounded = max(tail) >= 1.5 * max(early)
    h_tail = [theta.h(r) for r in range(max(1, R - 4), R + 1)]
    return RatioProfile(R, min(tail), max(tail), bool(unbounded), h_tail)
