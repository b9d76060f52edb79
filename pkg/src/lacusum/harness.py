"""Inclusion and equality laws between summability methods, checked per
instance (modulus, theta, sequence) at finite horizons.

A Consistent row is evidence on one instance, never a proof.  Violated is
only reported when the hypotheses are certified and every component
verdict it rests on is plateau-certified.
"""
from __future__ import annotations

import csv
import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .catalog import FAMILIES, Catalog, builtin_catalog, parse_blocks, parse_int
from .convergence import (DEFAULT_THRESHOLDS, LimitEstimate, SequenceSpec, Thresholds, Verdict,
                          residual_block_sums, test_statistical, test_strong_cesaro,
                          test_uniform_integrability)
from .counterexamples import (SEARCH_HORIZON, SEARCH_MAX_BLOCKS, WitnessedSequence,
                              build_block_indicator_sequence, build_reciproco_sequence,
                              build_sember_gap_sequence, build_th3_sequence)
from .errors import BadConfig, LacusumError, UnknownLaw
from .lacunary import LacunaryTheta, ratio_profile
from .modulus import Compatibility, ModulusSpec, classify_compatibility

CONSISTENT, VIOLATED, INCONCLUSIVE = "Consistent", "Violated", "Inconclusive"
TRUE, FALSE, UNKNOWN = "true", "false", "unknown"

HEADER_NOTE = ("Each row is a finite-horizon check on one instance. Consistent rows are "
               "evidence, not proof.")

DEFAULT_MIN_HORIZON = 10**6
DEFAULT_MAX_HORIZON = 10**7
DEFAULT_HORIZON_BLOCKS = 40
PROFILE_BLOCKS = 200
LIMINF_ABOVE = 1.1
LIMINF_ONE_BELOW = 1.02
M_GRID = (4.0, 16.0, 64.0, 256.0)
WITNESS_EPS = 0.5
FALLBACK_BASE = "log1p"
TRAJECTORY_POINTS = 200


def default_horizon(theta: Optional[LacunaryTheta]) -> int:
    """10^6 indices or 40 complete blocks, whichever is larger, capped at 10^7."""
    if theta is None:
        return DEFAULT_MIN_HORIZON
    try:
        k40 = theta.k(DEFAULT_HORIZON_BLOCKS)
    except IndexError:
        k40 = theta.k(theta.available)
    return int(min(max(DEFAULT_MIN_HORIZON, k40), DEFAULT_MAX_HORIZON))


@dataclass
class TheoremVerdict:
    law: str
    modulus: str
    theta: str
    sequence: str
    horizon: Optional[int]
    status: str
    hypothesis: dict = field(default_factory=dict)
    evidence: Dict[str, Verdict] = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    note: str = ""

    @property
    def instance(self) -> tuple:
        return (self.modulus, self.theta, self.sequence)

    def as_dict(self) -> dict:
        ev = {}
        for k, v in self.evidence.items():
            vals = [e.value for e in v.estimates.values()]
            ev[k] = {"method": v.method, "status": v.status,
                     "value": max(vals) if vals else None,
                     "plateau": all(e.plateau for e in v.estimates.values()),
                     "note": v.note}
        return {"law": self.law, "modulus": self.modulus, "theta": self.theta,
                "sequence": self.sequence, "horizon": self.horizon, "status": self.status,
                "hypothesis": self.hypothesis, "evidence": ev, "witness": self.witness,
                "note": self.note}


# -- shared computations ---------------------------------------------------


class Lab:
    """Caches tables, verdicts and predicates shared across instances."""

    def __init__(self, catalog: Optional[Catalog] = None, th: Thresholds = DEFAULT_THRESHOLDS):
        self.catalog = catalog or builtin_catalog()
        self.th = th
        self._lock = threading.RLock()
        self._cache: dict = {}

    def _memo(self, key, fn):
        with self._lock:
            if key not in self._cache:
                try:
                    self._cache[key] = (True, fn())
                except LacusumError as e:
                    self._cache[key] = (False, e)
            ok, val = self._cache[key]
        if not ok:
            raise val
        return val

    # predicates

    def compatible(self, f: ModulusSpec) -> Tuple[str, dict]:
        def run():
            cls = classify_compatibility(f)
            return _tri(cls.verdict, f.declared, cls.conflict)
        return self._memo(("compatible", f.name), run)

    def theta_compatible(self, f: ModulusSpec, theta: LacunaryTheta) -> Tuple[str, dict]:
        def run():
            val, ev = self.compatible(f)
            if val == TRUE:
                return TRUE, {"source": "compatible implies theta-compatible"}
            cls = classify_compatibility(f, horizon=SEARCH_HORIZON, theta=theta)
            # a modulus whose ratio f(n eps)/f(n) converges has phi_theta = phi for every theta
            return _tri(cls.verdict, f.declared, cls.conflict)
        return self._memo(("theta_compatible", f.name, theta.name), run)

    def profile(self, theta: LacunaryTheta):
        return self._memo(("profile", theta.name), lambda: ratio_profile(theta, PROFILE_BLOCKS))

    def liminf_gt1(self, theta: LacunaryTheta) -> Tuple[str, dict]:
        p = self.profile(theta)
        ev = {"liminf_est": p.liminf_est}
        if p.liminf_est >= LIMINF_ABOVE:
            return TRUE, ev
        if p.liminf_est < LIMINF_ONE_BELOW:
            return FALSE, ev
        return UNKNOWN, ev

    def limsup_finite(self, theta: LacunaryTheta) -> Tuple[str, dict]:
        p = self.profile(theta)
        ev = {"limsup_est": p.limsup_est, "unbounded_flag": p.unbounded_flag}
        return (FALSE if p.unbounded_flag else TRUE), ev

    # sequences

    def family(self, kind: str, f: ModulusSpec, theta: LacunaryTheta) -> WitnessedSequence:
        if kind in ("reciproco", "th3"):
            build = build_reciproco_sequence if kind == "reciproco" else build_th3_sequence
            base = f
            if self.theta_compatible(f, theta)[0] != FALSE:
                base = self.catalog.modulus(FALLBACK_BASE)
            return self._memo((kind, base.name, theta.name), lambda: build(base, theta))
        if kind == "sember":
            return self._memo((kind, theta.name), lambda: build_sember_gap_sequence(theta))
        if kind == "blockind":
            return self._memo((kind, theta.name), lambda: build_block_indicator_sequence(
                theta, default_horizon(theta)))
        raise BadConfig(f"unknown sequence family {kind!r}")

    def resolve(self, name: str, f, theta, override: Optional[int]):
        """(sequence, witnessed-or-None, horizon) for a catalog or family name."""
        if name in FAMILIES:
            w = self.family(name, f, theta)
            return w.seq, w, int(override or w.desk_horizon)
        return self.catalog.sequence(name), None, int(override or default_horizon(theta))

    # verdicts

    def table(self, seq: SequenceSpec, theta, horizon: int, checkpoints=None):
        key = ("table", seq.name, seq.limit, theta.name if theta else None, horizon,
               tuple(checkpoints) if checkpoints else None)
        return self._memo(key, lambda: residual_block_sums(seq, theta, horizon,
                                                           checkpoints=checkpoints))

    def verdict(self, kind: str, seq: SequenceSpec, f: ModulusSpec, theta, horizon: int,
                checkpoints=None) -> Verdict:
        key = ("verdict", kind, seq.name, seq.limit, f.name, theta.name if theta else None,
               horizon, tuple(checkpoints) if checkpoints else None)

        def run():
            if horizon < 1:
                raise BadConfig("horizon must be positive")
            tab = self.table(seq, theta, horizon, checkpoints)
            test = test_statistical if kind == "stat" else test_strong_cesaro
            return test(seq, f, theta, horizon, self.th, table=tab)
        return self._memo(key, run)

    def integrability(self, seq: SequenceSpec, theta: LacunaryTheta, horizon: int) -> Verdict:
        def run():
            R = theta.blocks_within(horizon)
            if R < 10:
                return Verdict("Inconclusive", "I_theta", {}, self.th,
                               f"only {R} blocks within horizon")
            return test_uniform_integrability(seq, theta, M_GRID, R, th=self.th).verdict
        return self._memo(("integrable", seq.name, seq.limit, theta.name, horizon), run)



def _tri(verdict: Compatibility, declared: Compatibility, conflict: bool) -> Tuple[str, dict]:
    if conflict:
        return UNKNOWN, {"source": "numeric", "verdict": verdict.value,
                         "declared": declared.value, "conflict": True}
    if verdict is Compatibility.COMPATIBLE:
        return TRUE, {"source": "numeric"}
    if verdict is Compatibility.INCOMPATIBLE:
        return FALSE, {"source": "numeric"}
    if declared is Compatibility.COMPATIBLE:
        return TRUE, {"source": "declared"}
    if declared is Compatibility.INCOMPATIBLE:
        return FALSE, {"source": "declared"}
    return UNKNOWN, {"source": "numeric"}


def _both(name: str, a: Verdict, b: Verdict) -> Verdict:
    if a.fails or b.fails:
        status = "Fails"
    elif a.holds and b.holds:
        status = "Holds"
    else:
        status = "Inconclusive"
    return Verdict(status, name, {**{f"{a.method}:{k}": e for k, e in a.estimates.items()},
                                  **{f"{b.method}:{k}": e for k, e in b.estimates.items()}},
                   a.thresholds)


def implies(a: Verdict, c: Verdict) -> str:
    """Status of "a => c" from two verdicts; Violated needs both certified."""
    if a.holds and c.fails:
        return VIOLATED
    if c.holds or a.fails:
        return CONSISTENT
    return INCONCLUSIVE


def equivalent(a: Verdict, b: Verdict) -> str:
    s = {implies(a, b), implies(b, a)}
    if VIOLATED in s:
        return VIOLATED
    return CONSISTENT if s == {CONSISTENT} else INCONCLUSIVE


def witness_ratios(table, f: ModulusSpec, blocks: List[int], use: str) -> List[float]:
    """f(numerator)/f(h) on the witness blocks, read off a block table."""
    out = []
    if use == "count":
        j = min(range(len(table.eps_grid)), key=lambda i: abs(table.eps_grid[i] - WITNESS_EPS))
    for r in blocks:
        t = r - 1
        if t >= len(table.index):
            return []
        num = float(table.counts[t, j]) if use == "count" else float(table.sums[t])
        out.append(float(f(num) / f(float(table.denom[t]))))
    return out


def witness_verdict(method: str, ratios: List[float], th: Thresholds) -> Verdict:
    """Fails when every witness block carries a ratio above the Fails threshold."""
    if not ratios:
        return Verdict("Inconclusive", method, {}, th, "witness blocks beyond horizon")
    lo = min(ratios)
    est = LimitEstimate(lo, list(enumerate(ratios, 1)), True, 0)
    status = "Fails" if lo >= th.fails else "Inconclusive"
    return Verdict(status, method, {"witness_min": est}, th, "evaluated on witness blocks only")


# -- laws ------------------------------------------------------------------


@dataclass(frozen=True)
class InclusionLaw:
    id: str
    statement: str
    kind: str  # implication | equality | converse
    hypothesis: tuple
    family: Optional[str] = None

    @property
    def per_sequence(self) -> bool:
        return self.kind != "converse"


LAWS: Dict[str, InclusionLaw] = {law.id: law for law in (
    InclusionLaw("N_theta_f_subset_N_theta", "N_theta^f is contained in N_theta",
                 "implication", ()),
    InclusionLaw("S_theta_eq_S_theta_f", "S_theta = S_theta^f for theta-compatible f",
                 "equality", ("theta_compatible",)),
    InclusionLaw("N_theta_f_eq_N_theta", "N_theta^f = N_theta for theta-compatible f",
                 "equality", ("theta_compatible",)),
    InclusionLaw("converse_theta_compat_stat",
                 "S_theta = S_theta^f forces theta-compatibility", "converse",
                 ("not theta_compatible",), "reciproco"),
    InclusionLaw("converse_theta_compat_cesaro",
                 "N_theta^f = N_theta forces theta-compatibility", "converse",
                 ("not theta_compatible",), "reciproco"),
    InclusionLaw("N_theta_f_subset_S_theta_f", "N_theta^f is contained in S_theta^f",
                 "implication", ()),
    InclusionLaw("KhanOrhan_forward",
                 "S_theta^f with I_theta is contained in N_theta^f for theta-compatible f",
                 "implication", ("theta_compatible",)),
    InclusionLaw("KhanOrhan_converse",
                 "S_theta^f with I_theta inside N_theta^f forces theta-compatibility",
                 "converse", ("not theta_compatible",), "th3"),
    InclusionLaw("P5_liminf_forward", "liminf q_r > 1 gives N^f inside N_theta^f",
                 "implication", ("liminf_gt1",)),
    InclusionLaw("P5_liminf_converse",
                 "compatible f with N^f inside N_theta = N_theta^f forces liminf q_r > 1",
                 "converse", ("compatible", "not liminf_gt1"), "blockind"),
    InclusionLaw("P5_limsup_forward",
                 "compatible f and limsup q_r finite give N_theta^f inside N^f",
                 "implication", ("compatible", "limsup_finite")),
    InclusionLaw("P5_limsup_converse",
                 "theta-compatible f with N_theta^f inside N^f forces limsup q_r finite",
                 "converse", ("theta_compatible", "not limsup_finite"), "sember"),
    InclusionLaw("Corollary_ratio_iff",
                 "for compatible f, N_theta^f = N^f iff 1 < liminf q_r <= limsup q_r < inf",
                 "equality", ("compatible",)),
)}


def get_law(law_id: str) -> InclusionLaw:
    try:
        return LAWS[law_id]
    except KeyError:
        raise UnknownLaw(law_id) from None


def _hypotheses(lab: Lab, law: InclusionLaw, f, theta) -> Tuple[str, dict]:
    """Combined truth value of the law's hypotheses and the per-predicate record."""
    record, overall = {}, TRUE
    for h in law.hypothesis:
        neg = h.startswith("not ")
        name = h[4:] if neg else h
        if name == "compatible":
            val, ev = lab.compatible(f)
        elif name == "theta_compatible":
            val, ev = lab.theta_compatible(f, theta)
        elif name == "liminf_gt1":
            val, ev = lab.liminf_gt1(theta)
        else:
            val, ev = lab.limsup_finite(theta)
        if neg and val != UNKNOWN:
            val = FALSE if val == TRUE else TRUE
        record[h] = {"value": val, **ev}
        if val == FALSE:
            overall = FALSE
        elif val == UNKNOWN and overall == TRUE:
            overall = UNKNOWN
    return overall, record


def _components(law_id: str, lab: Lab, f, theta, seq, H) -> Tuple[Verdict, Verdict]:
    """(antecedent, consequent) for the implication and equality laws."""
    ident = lab.catalog.modulus("identity") if "identity" in lab.catalog.moduli \
        else ModulusSpec("identity", "Identity")
    V = lab.verdict
    if law_id == "N_theta_f_subset_N_theta":
        return V("cesaro", seq, f, theta, H), V("cesaro", seq, ident, theta, H)
    if law_id == "N_theta_f_subset_S_theta_f":
        return V("cesaro", seq, f, theta, H), V("stat", seq, f, theta, H)
    if law_id == "S_theta_eq_S_theta_f":
        return V("stat", seq, ident, theta, H), V("stat", seq, f, theta, H)
    if law_id == "N_theta_f_eq_N_theta":
        return V("cesaro", seq, ident, theta, H), V("cesaro", seq, f, theta, H)
    if law_id == "KhanOrhan_forward":
        a = _both("S_theta^f & I_theta", V("stat", seq, f, theta, H),
                  lab.integrability(seq, theta, H))
        return a, V("cesaro", seq, f, theta, H)
    if law_id == "P5_liminf_forward":
        return V("cesaro", seq, f, None, H), V("cesaro", seq, f, theta, H)
    if law_id in ("P5_limsup_forward", "Corollary_ratio_iff"):
        return V("cesaro", seq, f, theta, H), V("cesaro", seq, f, None, H)
    raise UnknownLaw(law_id)


def _separation(lab: Lab, family: str, f, theta, override) -> Tuple[str, dict, dict, str]:
    """Run a counterexample family and judge whether it separates the two methods."""
    ident = ModulusSpec("identity", "Identity")
    try:
        w = lab.family(family, f, theta)
    except LacusumError as e:
        return INCONCLUSIVE, {}, {}, f"{family} not constructed: {e}"
    H = int(override or w.desk_horizon)
    wd = w.witness_data()
    ev: Dict[str, Verdict] = {}
    try:
        if family in ("reciproco", "th3"):
            tab = lab.table(w.seq, theta, H)
            if family == "reciproco":
                ev["plain"] = lab.verdict("stat", w.seq, ident, theta, H)
                ratios = witness_ratios(tab, f, w.witness_blocks, "count")
                ev["modulated"] = witness_verdict("S_theta^f@witness", ratios, lab.th)
                ev["cesaro_plain"] = lab.verdict("cesaro", w.seq, ident, theta, H)
                ev["cesaro_modulated"] = witness_verdict(
                    "N_theta^f@witness", witness_ratios(tab, f, w.witness_blocks, "sum"), lab.th)
            else:
                ev["integrable"] = lab.integrability(w.seq, theta, H)
                ev["plain"] = lab.verdict("stat", w.seq, f, theta, H)
                ratios = witness_ratios(tab, f, w.witness_blocks, "sum")
                ev["modulated"] = witness_verdict("N_theta^f@witness", ratios, lab.th)
            wd["witness_ratios"] = ratios
            ok = bool(ratios) and min(ratios) >= w.c_target * (1 - 1e-9)
            sep = ev["plain"].holds and ev["modulated"].fails and ok
            if family == "th3":
                sep = sep and ev["integrable"].holds
            return (CONSISTENT if sep else INCONCLUSIVE), ev, wd, ""
        if family == "sember":
            ev["lacunary"] = lab.verdict("cesaro", w.seq, f, theta, H)
            zero = SequenceSpec(w.seq.name, 0.0, segments=w.seq.segments)
            x0 = SequenceSpec(w.seq.name, w.x0, segments=w.seq.segments)
            ev["prefix_L0"] = lab.verdict("cesaro", zero, f, None, H, w.witness_prefixes["zero"])
            ev["prefix_Lx0"] = lab.verdict("cesaro", x0, f, None, H, w.witness_prefixes["x0"])
            sep = ev["lacunary"].holds and ev["prefix_L0"].fails and ev["prefix_Lx0"].fails
            return (CONSISTENT if sep else INCONCLUSIVE), ev, wd, ""
        ev["prefix"] = lab.verdict("cesaro", w.seq, f, None, H)
        ev["lacunary"] = lab.verdict("cesaro", w.seq, f, theta, H)
        sep = ev["prefix"].holds and ev["lacunary"].fails
        return (CONSISTENT if sep else INCONCLUSIVE), ev, wd, ""
    except LacusumError as e:
        return INCONCLUSIVE, ev, wd, str(e)


def run_inclusion_check(law, f, theta, seq_name: Optional[str] = None,
                        horizon: Optional[int] = None, lab: Optional[Lab] = None,
                        swap: bool = False) -> TheoremVerdict:
    """Evaluate one law on one instance.

    ``f``, ``theta`` may be names or objects; ``seq_name`` is a catalog
    sequence or family name (ignored by converse laws, which use their own
    family).  ``swap`` exchanges antecedent and consequent of an
    implication law, which turns it into a false statement for self-tests.
    """
    lab = lab or Lab()
    if isinstance(law, str):
        law = get_law(law)
    f = lab.catalog.modulus(f) if isinstance(f, str) else f
    theta = lab.catalog.theta(theta) if isinstance(theta, str) else theta
    if swap and law.kind != "implication":
        raise BadConfig(f"swap only applies to implication laws, not {law.id}")
    seq_label = law.family if not law.per_sequence else seq_name
    if seq_label is None:
        raise BadConfig(f"{law.id} needs a sequence")
    tv = TheoremVerdict(law.id, f.name, theta.name, seq_label, horizon, INCONCLUSIVE)
    if swap:
        tv.note = "swapped"

    try:
        hyp, tv.hypothesis = _hypotheses(lab, law, f, theta)
    except LacusumError as e:
        tv.note = f"hypothesis not evaluated: {e}"
        return tv
    if hyp == UNKNOWN:
        tv.note = "hypothesis unknown"
        return tv

    if law.kind == "converse":
        if hyp == FALSE:
            tv.status, tv.note = CONSISTENT, "vacuous: hypothesis false"
            return tv
        tv.status, tv.evidence, tv.witness, note = _separation(lab, law.family, f, theta, horizon)
        tv.horizon = _family_horizon(tv.witness, horizon)
        tv.note = note
        return tv

    if law.id == "Corollary_ratio_iff" and hyp == TRUE:
        lo, lo_ev = lab.liminf_gt1(theta)
        hi, hi_ev = lab.limsup_finite(theta)
        tv.hypothesis["ratio_condition"] = {"liminf_gt1": lo, "limsup_finite": hi,
                                            **lo_ev, **hi_ev}
        if UNKNOWN in (lo, hi):
            tv.note = "ratio condition unknown"
            return tv
        if FALSE in (lo, hi):
            family = "sember" if hi == FALSE else "blockind"
            tv.status, tv.evidence, tv.witness, note = _separation(lab, family, f, theta, horizon)
            tv.horizon = _family_horizon(tv.witness, horizon)
            tv.sequence = family
            tv.note = note or f"ratio condition fails; separation via {family}"
            return tv

    if hyp == FALSE:
        tv.status, tv.note = CONSISTENT, "vacuous: hypothesis false"
        return tv
    try:
        seq, _, H = lab.resolve(seq_label, f, theta, horizon)
        tv.horizon = H
        a, c = _components(law.id, lab, f, theta, seq, H)
    except LacusumError as e:
        tv.note = f"not evaluated: {e}"
        return tv
    if swap:
        a, c = c, a
    tv.evidence = {"antecedent": a, "consequent": c}
    tv.status = equivalent(a, c) if law.kind == "equality" else implies(a, c)
    return tv


def _family_horizon(wd: dict, override):
    return int(override) if override else wd.get("desk_horizon")


# -- suites ----------------------------------------------------------------


@dataclass
class SuiteEntry:
    law: InclusionLaw
    modulus: str
    theta: str
    sequence: Optional[str]
    horizon: Optional[int]
    swap: bool = False


@dataclass
class SuiteReport:
    results: List[TheoremVerdict]

    def counts(self) -> dict:
        out = {CONSISTENT: 0, VIOLATED: 0, INCONCLUSIVE: 0}
        for r in self.results:
            out[r.status] += 1
        return out

    @property
    def violated(self) -> int:
        return self.counts()[VIOLATED]

    def as_dict(self) -> dict:
        return {"header": {"note": HEADER_NOTE, "instances": len(self.results),
                           "counts": self.counts()},
                "results": [r.as_dict() for r in self.results]}


def _names(value: Optional[str], pool) -> List[str]:
    if value is None or value.strip() == "*":
        return list(pool)
    names = [v.strip() for v in value.split(",") if v.strip()]
    for n in names:
        if n not in pool:
            raise BadConfig(f"unknown name {n!r}")
    return names


CONFIG_KEYS = {"law", "modulus", "theta", "sequence", "horizon", "swap"}


def parse_config(text: str, catalog: Catalog) -> List[SuiteEntry]:
    """Expand a key=value config into suite entries in (law, instance) order."""
    entries = []
    for block in parse_blocks(text):
        extra = set(block) - CONFIG_KEYS
        if extra:
            raise BadConfig(f"unknown config keys {sorted(extra)}")
        if "law" not in block:
            raise BadConfig(f"config block without law: {block}")
        try:
            laws = [get_law(n) for n in _names(block["law"], LAWS)]
        except (UnknownLaw, BadConfig) as e:
            raise BadConfig(f"bad law list {block['law']!r}: {e}") from None
        mods = _names(block.get("modulus"), catalog.moduli)
        thetas = _names(block.get("theta"), catalog.thetas)
        seqs = _names(block.get("sequence"), list(catalog.sequences) + list(catalog.families))
        horizon = parse_int(block["horizon"]) if "horizon" in block else None
        if horizon is not None and horizon < 1:
            raise BadConfig("horizon must be positive")
        swap = block.get("swap", "false").lower()
        if swap not in ("true", "false"):
            raise BadConfig(f"swap must be true or false, got {swap!r}")
        for law in laws:
            if swap == "true" and law.kind != "implication":
                raise BadConfig(f"swap only applies to implication laws, not {law.id}")
            for m in mods:
                for t in thetas:
                    for s in (seqs if law.per_sequence else [None]):
                        entries.append(SuiteEntry(law, m, t, s, horizon, swap == "true"))
    order = {lid: i for i, lid in enumerate(LAWS)}
    entries.sort(key=lambda e: order[e.law.id])
    return entries


DEFAULT_CONFIG = "law=*\n"


def run_suite(config: str = DEFAULT_CONFIG, catalog: Optional[Catalog] = None,
              threads: int = 1, lab: Optional[Lab] = None) -> SuiteReport:
    """Run every (law, instance) named by ``config``; result order is deterministic."""
    lab = lab or Lab(catalog)
    entries = parse_config(config, lab.catalog)

    def job(e: SuiteEntry) -> TheoremVerdict:
        return run_inclusion_check(e.law, e.modulus, e.theta, e.sequence, e.horizon, lab, e.swap)

    if threads > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(job, entries))
    else:
        results = [job(e) for e in entries]
    return SuiteReport(results)


# -- output ----------------------------------------------------------------


def _fmt(x):
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return _fmt(float(x))
    return x


def to_json(obj) -> str:
    return json.dumps(_fmt(obj), indent=2)


def _thin(traj: list, n: int = TRAJECTORY_POINTS) -> list:
    if len(traj) <= n:
        return traj
    keep = sorted(set(np.unique(np.geomspace(1, len(traj), n).astype(int) - 1).tolist())
                  | {len(traj) - 1})
    return [traj[i] for i in keep]


def _safe(s: str) -> str:
    return "".join(c if c.isalnum() or c in "._-" else "_" for c in s)


def write_report(report: SuiteReport, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "w") as fh:
        fh.write(to_json(report.as_dict()) + "\n")
    with open(os.path.join(out, "report.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["law", "modulus", "theta", "sequence", "horizon", "status", "hypothesis",
                    "components", "note"])
        for r in report.results:
            hyp = ";".join(f"{k}={v['value'] if isinstance(v, dict) and 'value' in v else v}"
                           for k, v in r.hypothesis.items() if k != "ratio_condition")
            comp = ";".join(f"{k}:{v.method}={v.status}" for k, v in r.evidence.items())
            w.writerow([r.law, r.modulus, r.theta, r.sequence, r.horizon, r.status, hyp,
                        comp, r.note])
    tdir = os.path.join(out, "trajectories")
    os.makedirs(tdir, exist_ok=True)
    for i, r in enumerate(report.results):
        if not r.evidence:
            continue
        name = _safe(f"{i:05d}_{r.law}_{r.modulus}_{r.theta}_{r.sequence}") + ".csv"
        with open(os.path.join(tdir, name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["component", "method", "estimate", "checkpoint", "value"])
            for comp, v in r.evidence.items():
                if not v.estimates:
                    continue
                # the sum estimate, or the eps estimate with the largest final value
                key = max(v.estimates, key=lambda k: (k == "sum", v.estimates[k].value))
                for c, val in _thin(v.estimates[key].trajectory):
                    w.writerow([comp, v.method, key, c, f"{val:.12g}"])
