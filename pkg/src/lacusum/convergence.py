"""Residual accumulation, f-densities and finite-horizon convergence verdicts.

Eight methods are covered by argument selection:

    statistical    S (f=Identity, no theta)   S^f   S_theta   S_theta^f
    strong Cesaro  N                          N^f   N_theta   N_theta^f

Every method reduces to a ratio f(numerator) / f(denominator) evaluated at
checkpoints: prefixes n (denominator n) or complete lacunary blocks I_t
(denominator h_t).  The numerator is an exceedance count #{k : |x_k - L| > eps}
for the statistical methods and the residual sum sum |x_k - L| for the
strong ones.  A limit is replaced by a tail maximum and a plateau check.

Sums are correctly rounded (``math.fsum`` on dense data, exact rationals on
piecewise-constant data), so the two storage paths agree bit for bit.
"""
from __future__ import annotations

import bisect
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import BadParams, InvalidHorizon
from ._util import window_max as _window_max
from .modulus import ModulusSpec

EPS_GRID = tuple(2.0 ** -j for j in range(21))
PREFIX_POINTS_PER_DECADE = 5
_FSUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class Thresholds:
    holds: float = 0.02
    fails: float = 0.2
    plateau_rtol: float = 1e-2
    plateau_atol: float = 1e-2
    min_index: int = 10**4
    min_blocks: int = 8

    def __post_init__(self):
        if not (0 < self.holds < self.fails):
            raise BadParams(f"need 0 < holds ({self.holds}) < fails ({self.fails})")


DEFAULT_THRESHOLDS = Thresholds()


# -- sequences -----------------------------------------------------------


@dataclass(frozen=True)
class SequenceSpec:
    """A deterministic real sequence x_1, x_2, ... with candidate limit L.

    Either ``values`` (vectorised map from an int64 index array to floats)
    or ``segments`` must be given.  ``segments`` is a sorted tuple of
    disjoint inclusive runs (start, stop, value); the sequence is 0 off them.
    Segment-backed sequences are evaluated exactly for any horizon.
    """

    name: str
    limit: float = 0.0
    values: Optional[Callable] = field(default=None, compare=False, repr=False)
    segments: Optional[tuple] = None

    def __post_init__(self):
        if self.values is None and self.segments is None:
            raise BadParams(f"sequence {self.name} needs values or segments")
        if self.segments is not None:
            segs = tuple((int(a), int(b), float(v)) for a, b, v in self.segments)
            for (a, b, _), nxt in zip(segs, segs[1:] + ((None, None, None),)):
                if a < 1 or b < a or (nxt[0] is not None and nxt[0] <= b):
                    raise BadParams(f"sequence {self.name}: segments must be sorted, disjoint, >= 1")
            object.__setattr__(self, "segments", segs)

    @property
    def sparse(self) -> bool:
        return self.segments is not None

    def evaluate(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        if self.values is not None:
            return np.asarray(self.values(n), dtype=float)
        out = np.zeros(n.shape, dtype=float)
        if not self.segments:
            return out
        starts = np.array([a for a, _, _ in self.segments if a <= np.iinfo(np.int64).max],
                          dtype=np.int64)
        segs = self.segments[:len(starts)]
        stops = np.array([b for _, b, _ in segs], dtype=object)
        i = np.searchsorted(starts, n, side="right") - 1
        for j in np.unique(i[i >= 0]):
            sel = (i == j) & (n <= stops[j])
            out[sel] = segs[j][2]
        return out

    def at(self, n: int) -> float:
        if self.segments is not None:
            for a, b, v in self.segments:
                if a <= n <= b:
                    return v
            return 0.0
        return float(self.evaluate(np.array([n]))[0])


def residuals(seq: SequenceSpec, lo: int, hi: int) -> np.ndarray:
    """|x_k - L| for k = lo..hi as a float array."""
    return np.abs(seq.evaluate(np.arange(lo, hi + 1, dtype=np.int64)) - seq.limit)


def _fsum(arr: np.ndarray) -> float:
    return math.fsum(itertools.chain.from_iterable(
        arr[i:i + _FSUM_CHUNK].tolist() for i in range(0, arr.size, _FSUM_CHUNK)))


# -- residual tables -----------------------------------------------------


@dataclass
class ResidualTable:
    """Per-checkpoint residual sums and exceedance counts.

    ``index`` holds the right end of each checkpoint (k_t or n), ``denom``
    the block length h_t or n, and ``counts[p, j]`` = #{k : residual > eps_j}.
    """

    mode: str
    index: list
    denom: list
    blocks: list
    sums: list
    counts: np.ndarray
    eps_grid: tuple
    horizon: int
    theta: Optional[str] = None
    custom_checkpoints: bool = False

    def index_array(self) -> np.ndarray:
        if getattr(self, "_index_f", None) is None:
            self._index_f = np.asarray([float(i) for i in self.index])
        return self._index_f

    def as_rows(self) -> list:
        rows = []
        for p, (i, d, s) in enumerate(zip(self.index, self.denom, self.sums)):
            rows.append({"index": i, "denom": d, "sum": s,
                         "counts": [int(c) for c in self.counts[p]]})
        return rows


def prefix_checkpoints(horizon: int, first: int = 10,
                       per_decade: int = PREFIX_POINTS_PER_DECADE) -> list:
    if horizon < 1:
        raise InvalidHorizon("horizon must be >= 1")
    pts = set()
    e = 0
    while True:
        c = round(first * 10 ** (e / per_decade))
        if c >= horizon:
            break
        pts.add(int(c))
        e += 1
    pts.add(int(horizon))
    return sorted(p for p in pts if p >= 1)


def _exceed_index(r: np.ndarray, eps_grid: tuple) -> tuple:
    asc = np.sort(np.asarray(eps_grid, dtype=float))
    # number of grid values strictly below each residual
    idx = np.searchsorted(asc, r, side="left")
    pos = np.searchsorted(asc, np.asarray(eps_grid, dtype=float), side="left")
    return idx, pos


def _counts_from_bins(bins: np.ndarray, pos: np.ndarray) -> np.ndarray:
    # bins[..., m] = #residuals with exactly m grid values below them
    tail = np.cumsum(bins[..., ::-1], axis=-1)[..., ::-1]
    J = bins.shape[-1]
    return np.stack([tail[..., p + 1] if p + 1 < J else np.zeros(bins.shape[:-1], dtype=np.int64)
                     for p in pos], axis=-1)


def _dense_block_table(seq, theta, T, eps_grid):
    ks = theta.terms(T)
    r = residuals(seq, 1, ks[T])
    idx, pos = _exceed_index(r, eps_grid)
    J1 = len(eps_grid) + 1
    block_id = np.repeat(np.arange(T), np.diff(np.asarray(ks, dtype=np.int64)))
    bins = np.bincount(block_id * J1 + idx, minlength=T * J1).reshape(T, J1)
    counts = _counts_from_bins(bins, pos)
    sums = [_fsum(r[ks[t - 1]:ks[t]]) for t in range(1, T + 1)]
    return sums, counts


def _dense_prefix_table(seq, points, eps_grid):
    H = points[-1]
    r = residuals(seq, 1, H)
    idx, pos = _exceed_index(r, eps_grid)
    J1 = len(eps_grid) + 1
    edges = np.asarray([0] + points, dtype=np.int64)
    seg_id = np.repeat(np.arange(len(points)), np.diff(edges))
    bins = np.bincount(seg_id * J1 + idx, minlength=len(points) * J1).reshape(len(points), J1)
    counts = np.cumsum(_counts_from_bins(bins, pos), axis=0)
    sums = [_fsum(r[:c]) for c in points]
    return sums, counts


def _sparse_range(seq, lo, hi, eps_grid):
    """Exact residual sum and exceedance counts over the index range (lo, hi]."""
    L = seq.limit
    zero_res = abs(0.0 - L)
    total = Fraction(0)
    covered = 0
    counts = [0] * len(eps_grid)
    for a, b, v in seq.segments:
        if b <= lo:
            continue
        if a > hi:
            break
        n = min(b, hi) - max(a, lo + 1) + 1
        if n <= 0:
            continue
        d = abs(v - L)
        covered += n
        total += Fraction(d) * n
        for j, e in enumerate(eps_grid):
            if d > e:
                counts[j] += n
    zeros = (hi - lo) - covered
    total += Fraction(zero_res) * zeros
    for j, e in enumerate(eps_grid):
        if zero_res > e:
            counts[j] += zeros
    return float(total), counts


def _sparse_block_table(seq, ks, T, eps_grid):
    z = abs(0.0 - seq.limit)
    big = ks[T] > 2**52
    hs = [b - a for a, b in zip(ks, ks[1:T + 1])]
    row = [1 if z > e else 0 for e in eps_grid]
    if big:
        sums = [float(Fraction(z) * h) for h in hs]
        counts = np.array([[h * c for c in row] for h in hs], dtype=object)
    else:
        hs_arr = np.asarray(hs, dtype=np.int64)
        sums = (z * hs_arr.astype(float)).tolist()
        counts = np.outer(hs_arr, np.asarray(row, dtype=np.int64))
    touched = set()
    for a, b, _ in seq.segments:
        if a > ks[T]:
            break
        lo_t = bisect.bisect_left(ks, a)
        hi_t = min(bisect.bisect_left(ks, b), T)
        touched.update(range(max(lo_t, 1), hi_t + 1))
    for t in sorted(touched):
        s_t, c_t = _sparse_range(seq, ks[t - 1], ks[t], eps_grid)
        sums[t - 1] = s_t
        counts[t - 1] = c_t
    return sums, counts


def residual_block_sums(seq: SequenceSpec, theta=None, horizon: int = 10**6,
                        eps_grid: Sequence[float] = EPS_GRID,
                        checkpoints: Optional[Sequence[int]] = None) -> ResidualTable:
    """Residual sums and exceedance counts per complete block (theta) or per prefix."""
    horizon = int(horizon)
    if horizon < 1:
        raise InvalidHorizon("horizon must be >= 1")
    eps_grid = tuple(float(e) for e in eps_grid)
    J = len(eps_grid)
    if theta is not None:
        T = theta.blocks_within(horizon)
        ks = theta.terms(T) if T else [0]
        if T == 0:
            sums, counts = [], np.zeros((0, J), dtype=np.int64)
        elif seq.sparse:
            sums, counts = _sparse_block_table(seq, ks, T, eps_grid)
        else:
            sums, counts = _dense_block_table(seq, theta, T, eps_grid)
        return ResidualTable("block", ks[1:T + 1], [b - a for a, b in zip(ks, ks[1:T + 1])],
                             list(range(1, T + 1)), sums, counts, eps_grid, horizon, theta.name)

    custom = checkpoints is not None
    points = sorted({int(c) for c in checkpoints if 1 <= c <= horizon}) if custom \
        else prefix_checkpoints(horizon)
    if not points:
        raise InvalidHorizon("no checkpoints within horizon")
    if seq.sparse:
        sums, counts, prev = [], [], 0
        run_counts = [0] * J
        for c in points:
            s, _ = _sparse_range(seq, 0, c, eps_grid)
            _, cc = _sparse_range(seq, prev, c, eps_grid)
            run_counts = [x + y for x, y in zip(run_counts, cc)]
            sums.append(s)
            counts.append(list(run_counts))
            prev = c
        counts = np.array(counts, dtype=object if points[-1] > 2**62 else np.int64)
    else:
        sums, counts = _dense_prefix_table(seq, points, eps_grid)
    return ResidualTable("prefix", points, list(points), [], sums, counts, eps_grid, horizon,
                         None, custom)


# -- estimates and verdicts ---------------------------------------------


@dataclass
class LimitEstimate:
    value: float
    trajectory: list
    plateau: bool
    horizon: int

    def as_dict(self) -> dict:
        return {"value": self.value, "plateau": self.plateau, "horizon": self.horizon,
                "trajectory": [[c, v] for c, v in self.trajectory]}


def _stable(a: float, b: float, th: Thresholds) -> bool:
    return abs(a - b) <= th.plateau_rtol * max(abs(a), abs(b)) + th.plateau_atol


def estimate_limit(index: Sequence[int], raw: Sequence[float], mode: str, horizon: int,
                   th: Thresholds = DEFAULT_THRESHOLDS, custom: bool = False,
                   index_f: Optional[np.ndarray] = None) -> LimitEstimate:
    """Tail-max limsup surrogate over checkpoints.

    The partial value at a checkpoint with right end n is the max raw ratio
    over checkpoints whose right end lies in [n/10, n] (prefixes or block
    ends alike).  The plateau flag compares the final partial value with
    the one a decade of horizon earlier, and is never set when the scan is
    shorter than the thresholds' evidence minimum.
    """
    raw = np.asarray(raw, dtype=float)
    P = raw.size
    if P == 0:
        return LimitEstimate(float("nan"), [], False, horizon)
    idx = index_f if index_f is not None else np.asarray([float(i) for i in index])
    lo = np.searchsorted(idx * 10.0, idx, side="left")
    partial = _window_max(raw, lo)
    traj = list(zip(index, partial.tolist()))
    value = traj[-1][1]
    last = index[-1]
    if custom:
        back = P - 2
    else:
        earlier = np.flatnonzero(idx * 10.0 <= float(last))
        back = int(earlier[-1]) if earlier.size else -1
    enough = last >= th.min_index and (mode != "block" or P >= th.min_blocks)
    plateau = bool(enough and back >= 0 and _stable(value, traj[back][1], th))
    return LimitEstimate(value, traj, plateau, horizon)


@dataclass
class Verdict:
    status: str
    method: str
    estimates: dict
    thresholds: Thresholds = DEFAULT_THRESHOLDS
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == "Holds"

    @property
    def fails(self) -> bool:
        return self.status == "Fails"

    @property
    def decided(self) -> bool:
        return self.status != "Inconclusive"

    def as_dict(self, trajectories: bool = False) -> dict:
        est = {}
        for k, e in self.estimates.items():
            d = e.as_dict()
            if not trajectories:
                d.pop("trajectory")
            est[k] = d
        return {"status": self.status, "method": self.method, "note": self.note,
                "thresholds": {"holds": self.thresholds.holds, "fails": self.thresholds.fails},
                "estimates": est}


def decide(estimates: dict, th: Thresholds, allow_holds: bool = True) -> str:
    ests = list(estimates.values())
    if any(e.plateau and e.value >= th.fails for e in ests):
        return "Fails"
    if allow_holds and ests and all(e.plateau and e.value < th.holds for e in ests):
        return "Holds"
    return "Inconclusive"


def method_name(kind: str, f: ModulusSpec, theta) -> str:
    base = "S" if kind == "stat" else "N"
    if theta is not None:
        base += "_theta"
    if f.kind != "Identity":
        base += "^f"
    return base


def _as_float(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype == object:
        return np.asarray([float(v) for v in arr.ravel()]).reshape(arr.shape)
    return arr.astype(float)


def _ratios(f: ModulusSpec, num, denom) -> np.ndarray:
    num = _as_float(num)
    den = _as_float(denom)
    return np.asarray(f(num)) / np.asarray(f(den))


def test_statistical(seq: SequenceSpec, f: ModulusSpec, theta=None, horizon: int = 10**6,
                     th: Thresholds = DEFAULT_THRESHOLDS,
                     checkpoints: Optional[Sequence[int]] = None,
                     table: Optional[ResidualTable] = None) -> Verdict:
    """S, S^f, S_theta or S_theta^f membership at a finite horizon."""
    if table is None:
        table = residual_block_sums(seq, theta, horizon, checkpoints=checkpoints)
    ests = {}
    for j, eps in enumerate(table.eps_grid):
        raw = _ratios(f, table.counts[:, j] if len(table.index) else [], table.denom)
        ests[f"eps={eps:.12g}"] = estimate_limit(table.index, raw, table.mode, table.horizon, th,
                                                 table.custom_checkpoints, table.index_array())
    status = decide(ests, th, allow_holds=not table.custom_checkpoints)
    note = "subsequence checkpoints: only Fails can be certified" if table.custom_checkpoints else ""
    return Verdict(status, method_name("stat", f, theta), ests, th, note)


test_statistical.__test__ = False


def test_strong_cesaro(seq: SequenceSpec, f: ModulusSpec, theta=None, horizon: int = 10**6,
                       th: Thresholds = DEFAULT_THRESHOLDS,
                       checkpoints: Optional[Sequence[int]] = None,
                       table: Optional[ResidualTable] = None) -> Verdict:
    """N, N^f, N_theta or N_theta^f membership at a finite horizon."""
    if table is None:
        table = residual_block_sums(seq, theta, horizon, checkpoints=checkpoints)
    raw = _ratios(f, table.sums, table.denom)
    ests = {"sum": estimate_limit(table.index, raw, table.mode, table.horizon, th,
                                  table.custom_checkpoints, table.index_array())}
    status = decide(ests, th, allow_holds=not table.custom_checkpoints)
    note = "subsequence checkpoints: only Fails can be certified" if table.custom_checkpoints else ""
    return Verdict(status, method_name("cesaro", f, theta), ests, th, note)


test_strong_cesaro.__test__ = False


def f_density(f: ModulusSpec, indicator: Callable, horizon: int, theta=None,
              th: Thresholds = DEFAULT_THRESHOLDS) -> LimitEstimate:
    """Estimate d_f(A) (or d_{f,theta}(A)) for A given by a vectorised predicate."""
    seq = SequenceSpec("indicator", 0.0,
                       values=lambda n: np.asarray(indicator(n), dtype=bool).astype(float))
    table = residual_block_sums(seq, theta, horizon, eps_grid=(0.5,))
    raw = _ratios(f, table.counts[:, 0], table.denom)
    return estimate_limit(table.index, raw, table.mode, table.horizon, th,
                          index_f=table.index_array())


# -- lacunary uniform integrability --------------------------------------


@dataclass
class IntegrabilityReport:
    M_grid: list
    values: list
    verdict: Verdict
    normalized: bool

    def as_dict(self) -> dict:
        return {"M_grid": self.M_grid, "values": self.values, "normalized": self.normalized,
                "verdict": self.verdict.status}


def _truncated_block_sum(seq, lo, hi, M, r=None):
    if seq.sparse:
        L = seq.limit
        total = Fraction(0)
        covered = 0
        for a, b, v in seq.segments:
            if b <= lo:
                continue
            if a > hi:
                break
            n = min(b, hi) - max(a, lo + 1) + 1
            if n <= 0:
                continue
            covered += n
            d = abs(v - L)
            if d >= M:
                total += Fraction(d) * n
        z = abs(L)
        if z >= M:
            total += Fraction(z) * ((hi - lo) - covered)
        return float(total)
    return _fsum(r[r >= M])


def test_uniform_integrability(seq: SequenceSpec, theta, M_grid: Sequence[float], R: int,
                               normalized: bool = True,
                               th: Thresholds = DEFAULT_THRESHOLDS) -> IntegrabilityReport:
    """sup over the first R blocks of the (h_t-normalised) residual mass above M."""
    M_grid = [float(m) for m in M_grid]
    if any(b <= a for a, b in zip(M_grid, M_grid[1:])) or not M_grid:
        raise BadParams("M_grid must be strictly increasing")
    if R < 10:
        raise BadParams("R must be >= 10")
    ks = theta.terms(R)
    block_res = None
    if not seq.sparse:
        r_all = residuals(seq, 1, ks[R])
        block_res = [r_all[ks[t - 1]:ks[t]] for t in range(1, R + 1)]
    values = []
    for M in M_grid:
        best = 0.0
        for t in range(1, R + 1):
            s = _truncated_block_sum(seq, ks[t - 1], ks[t], M,
                                     None if block_res is None else block_res[t - 1])
            if normalized:
                s = s / (ks[t] - ks[t - 1])
            best = max(best, s)
        values.append(best)
    final = values[-1]
    settled = len(values) < 2 or _stable(values[-1], values[-2], th)
    if final < th.holds:
        status = "Holds"
    elif final >= th.fails and settled:
        status = "Fails"
    else:
        status = "Inconclusive"
    est = LimitEstimate(final, list(zip(M_grid, values)), settled, ks[R])
    verdict = Verdict(status, "I_theta", {"M": est}, th)
    return IntegrabilityReport(M_grid, values, verdict, normalized)


test_uniform_integrability.__test__ = False
