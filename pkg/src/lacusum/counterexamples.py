"""Explicit separating sequences for the converse inclusion results.

Every constructor returns a :class:`WitnessedSequence`: a segment-backed
``SequenceSpec`` together with the blocks it was built on, so that tests
and the harness can evaluate it at horizons far beyond dense enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .convergence import SequenceSpec
from .errors import BadParams, BoundedRatios, CompatibleModulus, InequalityViolated
from .lacunary import LacunaryTheta, ratio_profile
from .modulus import Compatibility, ModulusSpec, classify_compatibility, phi_estimate

SEARCH_HORIZON = 2**40
SEARCH_MAX_BLOCKS = 10**6
C_FRACTION = 0.9
DESK_FACTOR = 1000

EpsSeq = Union[Callable[[int], float], Sequence[float]]


def inverse_k(k: int) -> float:
    return 1.0 / k


@dataclass
class WitnessedSequence:
    kind: str
    seq: SequenceSpec
    theta: LacunaryTheta
    witness_blocks: list
    witness_sizes: list = field(default_factory=list)
    witness_eps: list = field(default_factory=list)
    separation_c: float = 0.0
    c_target: float = 0.0
    eps_skipped: list = field(default_factory=list)
    desk_horizon: int = 0
    witness_prefixes: dict = field(default_factory=dict)
    x0: Optional[float] = None

    @property
    def eps_seq(self) -> list:
        return list(self.witness_eps)

    def witness_data(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta.name,
            "witness_blocks": self.witness_blocks,
            "witness_sizes": self.witness_sizes,
            "witness_eps": self.witness_eps,
            "separation_c": self.separation_c,
            "c_target": self.c_target,
            "eps_skipped": self.eps_skipped,
            "desk_horizon": self.desk_horizon,
            "witness_prefixes": self.witness_prefixes,
        }


def _eps_values(eps_seq: EpsSeq) -> Iterable[float]:
    if callable(eps_seq):
        k = 1
        while True:
            yield float(eps_seq(k))
            k += 1
    else:
        yield from (float(e) for e in eps_seq)


def desk_horizon(theta: LacunaryTheta, last_index: int, min_blocks: int = 10) -> int:
    """Horizon leaving two clean decades after ``last_index``, with enough blocks."""
    return max(DESK_FACTOR * int(last_index), theta.k(min_blocks), 10**6)


def _select_witnesses(f: ModulusSpec, theta: LacunaryTheta, eps_seq: EpsSeq, K: int,
                      eq5: bool, search_horizon: int, max_blocks: int):
    if K < 3:
        raise BadParams("K must be >= 3")
    cls = classify_compatibility(f, horizon=search_horizon, theta=theta)
    if cls.verdict is Compatibility.COMPATIBLE:
        raise CompatibleModulus(f"{f.name} is numerically {theta.name}-compatible")

    chosen, skipped = [], []
    prev = None
    for e in _eps_values(eps_seq):
        if not e > 0:
            raise BadParams("eps_seq must be positive")
        if prev is not None and e >= prev:
            raise BadParams("eps_seq must be strictly decreasing")
        prev = e
        if eq5 and e >= 1.0:
            # h (1 - eps) - 1 > 0 has no solution
            skipped.append(e)
            continue
        chosen.append(e)
        if len(chosen) == K:
            break
    if len(chosen) < K:
        raise BadParams(f"eps_seq yields only {len(chosen)} admissible values")

    c_target = C_FRACTION * phi_estimate(f, chosen[-1], search_horizon, theta, max_blocks).value
    T = theta.blocks_with_length_upto(search_horizon, max_blocks)
    h = np.asarray(theta.lengths(T), dtype=float)
    fh = f(h)
    blocks, ratios = [], []
    r_prev = 0
    for e in chosen:
        ok = f(h * e) >= c_target * fh
        if eq5:
            ok &= h * (1.0 - e) - 1.0 > 0
        ok[:r_prev] = False
        hits = np.flatnonzero(ok)
        if hits.size == 0:
            raise CompatibleModulus(
                f"no block with f(h*{e:g}) >= {c_target:.4g} f(h) up to h = {search_horizon}")
        r = int(hits[0]) + 1
        blocks.append(r)
        ratios.append(float(f(h[r - 1] * e) / fh[r - 1]))
        r_prev = r
    return chosen, skipped, blocks, ratios, c_target


def build_reciproco_sequence(f: ModulusSpec, theta: LacunaryTheta, eps_seq: EpsSeq = inverse_k,
                             K: int = 5, search_horizon: int = SEARCH_HORIZON,
                             max_blocks: int = SEARCH_MAX_BLOCKS) -> WitnessedSequence:
    """Indicator of A = union of A_k, A_k the last n_k indices of block r_k.

    n_k = floor(h_{r_k} eps_k) + 1, so #A_k / h_{r_k} -> 0 while
    f(#A_k) / f(h_{r_k}) >= f(h_{r_k} eps_k) / f(h_{r_k}) stays above c.
    """
    eps, skipped, blocks, ratios, c_target = _select_witnesses(
        f, theta, eps_seq, K, True, search_horizon, max_blocks)
    segments, sizes = [], []
    for e, r in zip(eps, blocks):
        h = theta.h(r)
        n = math.floor(h * e) + 1
        start = theta.k(r) - n + 1
        if not (h * (1.0 - e) - 1.0 > 0) or start <= theta.k(r - 1):
            raise InequalityViolated(f"A_k does not fit inside block {r}")
        segments.append((start, theta.k(r), 1.0))
        sizes.append(n)
    seq = SequenceSpec(f"reciproco[{f.name},{theta.name}]", 0.0, segments=tuple(segments))
    return WitnessedSequence("reciproco", seq, theta, blocks, sizes, eps, min(ratios), c_target,
                             skipped, desk_horizon(theta, theta.k(blocks[-1])))


def build_th3_sequence(f: ModulusSpec, theta: LacunaryTheta, eps_seq: EpsSeq = inverse_k,
                       K: int = 5, search_horizon: int = SEARCH_HORIZON,
                       max_blocks: int = SEARCH_MAX_BLOCKS) -> WitnessedSequence:
    """x_n = eps_k on the whole witness block I_{r_k}, 0 elsewhere (bounded by eps_1)."""
    eps, skipped, blocks, ratios, c_target = _select_witnesses(
        f, theta, eps_seq, K, False, search_horizon, max_blocks)
    segments = [(theta.k(r - 1) + 1, theta.k(r), e) for e, r in zip(eps, blocks)]
    seq = SequenceSpec(f"th3[{f.name},{theta.name}]", 0.0, segments=tuple(segments))
    return WitnessedSequence("th3", seq, theta, blocks, [theta.h(r) for r in blocks], eps,
                             min(ratios), c_target, skipped,
                             desk_horizon(theta, theta.k(blocks[-1])))


def build_sember_gap_sequence(theta: LacunaryTheta, x0: float = 1.0, J: int = 4,
                              profile_blocks: int = 30, max_blocks: int = 200) -> WitnessedSequence:
    """x_k = x0 on (k_{r(j-1)}, 2 k_{r(j-1)}) for j = 1..J, where q_{r(j)} > j.

    The runs are short relative to the following block, so the lacunary
    means vanish, while the prefix means at 2 k_{r(j-1)} stay near |x0|/2
    and those at k_{r(j)} against the limit x0 stay near |x0|.
    """
    if x0 == 0:
        raise BadParams("x0 must be nonzero")
    if J < 3:
        raise BadParams("J must be >= 3")
    if not ratio_profile(theta, profile_blocks).unbounded_flag:
        raise BoundedRatios(f"{theta.name}: ratio profile shows bounded q_r")
    sel = []
    r = 1
    for j in range(J + 1):
        r += 1
        while theta.q(r) <= j:
            r += 1
            if r > max_blocks:
                raise BoundedRatios(f"{theta.name}: no q_r > {j} within {max_blocks} blocks")
        sel.append(r)
    segments = []
    for j in range(1, J + 1):
        k = theta.k(sel[j - 1])
        if k < 2 or (segments and segments[-1][1] >= k + 1):
            raise BadParams(f"{theta.name}: gap runs overlap at j = {j}")
        segments.append((k + 1, 2 * k - 1, float(x0)))
    if any(2 * theta.k(sel[j - 1]) > theta.k(sel[j]) for j in range(1, J + 1)):
        raise BadParams(f"{theta.name}: q_r too small for disjoint gap runs")
    seq = SequenceSpec(f"sember[{theta.name}]", 0.0, segments=tuple(segments))
    prefixes = {
        "zero": [2 * theta.k(sel[j - 1]) for j in range(1, J + 1)],
        "x0": [theta.k(sel[j]) for j in range(1, J + 1)],
    }
    return WitnessedSequence("sember", seq, theta, sel, [], [], 0.0, 0.0, [],
                             desk_horizon(theta, theta.k(sel[J])), prefixes, float(x0))


def build_block_indicator_sequence(theta: LacunaryTheta, horizon: int,
                                   slack: float = 0.05) -> WitnessedSequence:
    """Indicator of whole blocks I_r with q_r near 1, at r = 2, 4, 8, ...

    Used when liminf q_r = 1: each chosen block has lacunary mean 1, while
    the chosen blocks are too thin for the prefix means to notice.
    """
    T = theta.blocks_within(horizon)
    blocks = []
    r = 2
    while r <= T:
        if theta.q(r) <= 1 + slack or r == 2:
            blocks.append(r)
        r *= 2
    blocks = [b for b in blocks if theta.q(b) <= 1 + slack]
    if len(blocks) < 3:
        raise BadParams(f"{theta.name}: fewer than 3 blocks with q_r <= {1 + slack}")
    segments = [(theta.k(r - 1) + 1, theta.k(r), 1.0) for r in blocks]
    seq = SequenceSpec(f"blockind[{theta.name}]", 0.0, segments=tuple(segments))
    return WitnessedSequence("blockind", seq, theta, blocks, [theta.h(r) for r in blocks],
                             desk_horizon=int(horizon))
