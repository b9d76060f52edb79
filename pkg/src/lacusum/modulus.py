"""Modulus functions, axiom checks and the compatibility functionals.

A modulus is an unbounded increasing subadditive f on [0, inf) with
f(0) = 0 and right continuity at 0.  The compatibility functional

    phi(eps) = limsup_n f(n eps) / f(n)

(or its lacunary version, with n restricted to the block lengths h_t of a
lacunary sequence) is estimated here by a tail maximum over a finite scan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ._util import window_max
from .errors import GridTooCoarse, InvalidHorizon, InvalidParams, NegativeInput

LAMBERTW_MAX_ITER = 50
LAMBERTW_RTOL = 1e-12

COMPATIBLE_BELOW = 0.05
INCOMPATIBLE_ABOVE = 0.5
PHI_PLATEAU_RTOL = 1e-3

_CHUNK = 1 << 20


class Compatibility(str, Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    UNKNOWN = "Unknown"


KINDS = ("PowerSum", "PowerPlusLog", "XPlusRatio", "Log1p", "LambertW", "Identity", "Custom")


def lambertw(x):
    """Principal branch of Lambert W on [0, inf), by Newton's method.

    Seeded at log(1 + x), which lies above W(x); Newton on the convex map
    w -> w e^w - x then decreases monotonically to the root.  The stopping
    rule is relative to x so that tiny arguments keep full precision.
    """
    x = np.asarray(x, dtype=float)
    w = np.log1p(x)
    tol = LAMBERTW_RTOL * x
    for _ in range(LAMBERTW_MAX_ITER):
        ew = np.exp(w)
        resid = w * ew - x
        if np.all(np.abs(resid) <= tol):
            break
        step = resid / (ew * (w + 1.0))
        w_next = w - step
        if np.array_equal(w_next, w):
            break
        w = w_next
    return w


@dataclass(frozen=True)
class ModulusSpec:
    name: str
    kind: str
    params: tuple = ()
    declared: Compatibility = Compatibility.UNKNOWN
    evaluator: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"unknown modulus kind {self.kind!r}")
        object.__setattr__(self, "declared", Compatibility(self.declared))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        need = {"PowerSum": 2, "PowerPlusLog": 1}.get(self.kind, 0)
        if len(self.params) != need:
            raise InvalidParams(f"{self.kind} takes {need} parameter(s), got {len(self.params)}")
        if any(not (0.0 < p <= 1.0) for p in self.params):
            raise InvalidParams(f"exponents must lie in (0, 1], got {self.params}")
        if self.kind == "Custom" and self.evaluator is None:
            raise InvalidParams("Custom modulus needs an evaluator")

    def _raw(self, x: np.ndarray) -> np.ndarray:
        kind = self.kind
        if kind == "Identity":
            return x
        if kind == "Log1p":
            return np.log1p(x)
        if kind == "XPlusRatio":
            return x + x / (x + 1.0)
        if kind == "PowerSum":
            p, q = self.params
            return np.power(x, p) + np.power(x, q)
        if kind == "PowerPlusLog":
            return np.power(x, self.params[0]) + np.log1p(x)
        if kind == "LambertW":
            return lambertw(x)
        return np.asarray(self.evaluator(x), dtype=float)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise NegativeInput(f"modulus {self.name} evaluated at a negative input")
        out = self._raw(arr)
        if np.ndim(out) == 0:
            return float(out)
        return out


def eval_modulus(spec: ModulusSpec, x: float) -> float:
    return spec(x)


@dataclass
class AxiomReport:
    name: str
    zero_ok: bool
    subadditive_ok: bool
    increasing_ok: bool
    right_continuous_ok: bool
    unbounded_ok: bool
    witnesses: dict

    @property
    def all_ok(self) -> bool:
        return (self.zero_ok and self.subadditive_ok and self.increasing_ok
                and self.right_continuous_ok and self.unbounded_ok)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "zero": self.zero_ok,
            "subadditive": self.subadditive_ok,
            "increasing": self.increasing_ok,
            "right_continuous": self.right_continuous_ok,
            "unbounded": self.unbounded_ok,
            "witnesses": self.witnesses,
        }


def check_modulus_axioms(spec: ModulusSpec, grid_max: float, grid_points: int,
                         n_pairs: int = 20000, seed: int = 0, tol: float = 1e-12) -> AxiomReport:
    """Check the modulus axioms (plus unboundedness) on a log-spaced grid."""
    if grid_points < 2:
        raise InvalidParams("grid_points must be >= 2")
    grid = np.concatenate([[0.0], np.geomspace(1e-6, grid_max, grid_points)])
    fx = spec(grid)
    witnesses: dict = {}

    zero_ok = bool(fx[0] == 0.0 and np.all(fx[1:] > 0))
    if not zero_ok:
        bad = 0 if fx[0] != 0.0 else int(np.argmin(fx[1:] > 0)) + 1
        witnesses["zero"] = [float(grid[bad]), float(fx[bad])]

    drops = np.flatnonzero(np.diff(fx) < -tol * np.maximum(1.0, np.abs(fx[1:])))
    increasing_ok = drops.size == 0
    if not increasing_ok:
        i = int(drops[0])
        witnesses["increasing"] = [float(grid[i]), float(grid[i + 1])]

    rng = np.random.default_rng(seed)
    pos = grid[1:]
    xs = np.concatenate([pos, rng.choice(pos, n_pairs)])
    ys = np.concatenate([pos, rng.choice(pos, n_pairs)])
    lhs = spec(xs + ys)
    rhs = spec(xs) + spec(ys)
    excess = lhs - rhs - tol * np.maximum(1.0, rhs)
    subadditive_ok = bool(np.all(excess <= 0))
    if not subadditive_ok:
        i = int(np.argmax(excess))
        witnesses["subadditive"] = [float(xs[i]), float(ys[i])]

    small = spec(10.0 ** -np.arange(1, 16, dtype=float))
    right_continuous_ok = bool(np.all(np.diff(small) <= 0) and small[-1] < 1e-3 * small[0])

    decades = np.arange(0, int(math.floor(math.log10(max(grid_max, 10.0)))) + 1, dtype=float)
    big = spec(10.0 ** decades)
    unbounded_ok = bool(np.all(np.diff(big) > 0))
    if unbounded_ok and big.size >= 3:
        # a bounded f shows vanishing increments over decades
        inc = np.diff(big)
        unbounded_ok = bool(inc[-1] > 1e-3 * inc[0])

    return AxiomReport(spec.name, zero_ok, subadditive_ok, increasing_ok,
                       right_continuous_ok, unbounded_ok, witnesses)


@dataclass
class PhiEstimate:
    epsilon: float
    value: float
    trajectory: list
    plateau: bool
    mode: str
    theta: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "name": None,
            "epsilon": self.epsilon,
            "value": self.value,
            "plateau": self.plateau,
            "mode": self.mode,
            "theta": self.theta,
        }


def _chunked_ratio_max(spec, eps, lo, hi):
    best = -np.inf
    start = lo
    while start <= hi:
        stop = min(hi, start + _CHUNK - 1)
        n = np.arange(start, stop + 1, dtype=float)
        best = max(best, float(np.max(spec(n * eps) / spec(n))))
        start = stop + 1
    return best


def _decade_checkpoints(horizon: int, first: int = 100) -> list:
    pts = []
    c = first
    while c < horizon:
        pts.append(c)
        c *= 10
    pts.append(horizon)
    return pts


def _plateau(new: float, old: float, rtol: float) -> bool:
    return abs(new - old) <= rtol * max(abs(new), abs(old), 1e-300)


def phi_estimate(spec: ModulusSpec, epsilon: float, horizon: int, theta=None,
                 max_blocks: int = 10**6) -> PhiEstimate:
    """Tail-max estimate of phi(eps) (or phi_theta(eps) when theta is given).

    Each checkpoint c stores the max ratio over the window [c/2, c]; the
    estimate is the value at the final checkpoint, and the plateau flag
    compares it with the checkpoint one decade earlier.
    """
    if horizon < 100:
        raise InvalidHorizon(f"horizon must be >= 100, got {horizon}")
    if not epsilon > 0:
        raise InvalidParams("epsilon must be positive")
    horizon = int(horizon)

    if theta is None:
        traj = []
        for c in _decade_checkpoints(horizon):
            traj.append((c, _chunked_ratio_max(spec, epsilon, max(1, c // 2), c)))
        value = traj[-1][1]
        prev = [v for c, v in traj if c <= horizon // 10]
        plateau = bool(prev) and _plateau(value, prev[-1], PHI_PLATEAU_RTOL)
        return PhiEstimate(float(epsilon), float(value), traj, plateau, "Global")

    T = theta.blocks_with_length_upto(horizon, max_blocks)
    if T < 2:
        raise InvalidHorizon(f"no lacunary blocks of length <= {horizon}")
    h = np.asarray(theta.lengths(T), dtype=float)
    ratios = spec(h * epsilon) / spec(h)
    t = np.arange(1, T + 1)
    partial = window_max(ratios, (t + 1) // 2 - 1)
    traj = [(int(h[i]), float(partial[i])) for i in range(T)]
    value = traj[-1][1]
    hmax = float(h[T - 1])
    prev = np.flatnonzero(h <= hmax / 10)
    plateau = prev.size > 0 and _plateau(value, traj[prev[-1]][1], PHI_PLATEAU_RTOL)
    return PhiEstimate(float(epsilon), float(value), traj, plateau, "Lacunary", theta.name)


@dataclass
class Classification:
    verdict: Compatibility
    estimates: list
    declared: Compatibility
    conflict: bool

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "declared": self.declared.value,
            "conflict": self.conflict,
            "estimates": [{"epsilon": e.epsilon, "value": e.value, "plateau": e.plateau}
                          for e in self.estimates],
        }


DEFAULT_EPS_GRID = (0.1, 0.01, 0.001, 0.0001)


def _settled_down(est: PhiEstimate) -> bool:
    # a non-increasing tail-max trajectory only moves further below the threshold
    if est.plateau:
        return True
    return len(est.trajectory) >= 2 and est.trajectory[-1][1] <= est.trajectory[-2][1]


def _settled_up(est: PhiEstimate) -> bool:
    if est.plateau:
        return True
    return len(est.trajectory) >= 2 and est.trajectory[-1][1] >= est.trajectory[-2][1]


def classify_compatibility(spec: ModulusSpec, eps_grid: Sequence[float] = DEFAULT_EPS_GRID,
                           horizon: int = 10**6, theta=None) -> Classification:
    grid = [float(e) for e in eps_grid]
    if len(grid) < 4 or any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise GridTooCoarse("eps_grid must hold at least 4 strictly decreasing positives")
    ests = [phi_estimate(spec, e, horizon, theta) for e in grid]
    vals = [e.value for e in ests]
    nonincreasing = all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    if nonincreasing and vals[-1] < COMPATIBLE_BELOW and all(_settled_down(e) for e in ests):
        verdict = Compatibility.COMPATIBLE
    elif min(vals) >= INCOMPATIBLE_ABOVE and all(_settled_up(e) for e in ests):
        verdict = Compatibility.INCOMPATIBLE
    else:
        verdict = Compatibility.UNKNOWN
    conflict = (spec.declared is not Compatibility.UNKNOWN
                and verdict is not Compatibility.UNKNOWN
                and verdict is not spec.declared)
    return Classification(verdict, ests, spec.declared, conflict)
