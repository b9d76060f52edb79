"""Built-in moduli, lacunary sequences and test sequences, plus the
line-oriented ``key=value`` file format used for catalogs and configs.

A file is a list of blocks separated by blank lines; ``#`` starts a comment.
Catalog blocks carry ``type`` in {modulus, theta, sequence}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from .convergence import SequenceSpec
from .errors import BadConfig, LacusumError
from .lacunary import LacunaryTheta, build_lacunary
from .modulus import Compatibility, ModulusSpec

FAMILIES = ("reciproco", "th3", "sember", "blockind")
SUPEREXP_BLOCKS = 40


def parse_blocks(text: str) -> List[Dict[str, str]]:
    blocks, cur = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            if cur:
                blocks.append(cur)
                cur = {}
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise BadConfig(f"line {lineno}: empty key")
        if key in cur:
            raise BadConfig(f"line {lineno}: duplicate key {key!r}")
        cur[key] = value
    if cur:
        blocks.append(cur)
    return blocks


def parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise BadConfig(f"not a number: {s!r}") from None


def parse_int(s: str) -> int:
    v = parse_float(s)
    if v != int(v):
        raise BadConfig(f"not an integer: {s!r}")
    return int(v)


def _floats(s: str) -> tuple:
    return tuple(parse_float(p) for p in s.split(",") if p.strip())


# -- dense sequences -----------------------------------------------------


def _is_pow2(n):
    return (n & (n - 1)) == 0


def _is_square(n):
    r = np.floor(np.sqrt(n.astype(float))).astype(np.int64)
    r += (r + 1) * (r + 1) <= n
    r -= r * r > n
    return r * r == n


def _is_cube(n):
    r = np.round(np.cbrt(n.astype(float))).astype(np.int64)
    return r * r * r == n


INDICATORS = {
    "squares": _is_square,
    "cubes": _is_cube,
    "pow2": _is_pow2,
    "evens": lambda n: n % 2 == 0,
}


def _dense(name: str, kind: str, params: tuple = (), limit: float = 0.0) -> SequenceSpec:
    if kind == "zero":
        fn = lambda n: np.zeros(n.shape)
    elif kind == "constant":
        (c,) = params
        fn = lambda n: np.full(n.shape, c)
    elif kind == "power":
        (p,) = params
        fn = lambda n: 1.0 / np.power(n.astype(float), p)
    elif kind == "geometric_decay":
        fn = lambda n: np.exp2(-n.astype(float))
    elif kind == "indicator":
        (which,) = params
        if which not in INDICATORS:
            raise BadConfig(f"unknown indicator set {which!r}")
        pred = INDICATORS[which]
        fn = lambda n: pred(n).astype(float)
    elif kind == "alternating":
        fn = lambda n: np.where(n % 2 == 0, 1.0, -1.0)
    elif kind == "spikes":
        fn = lambda n: np.where(_is_pow2(n), n.astype(float), 0.0)
    else:
        raise BadConfig(f"unknown sequence kind {kind!r}")
    return SequenceSpec(name, float(limit), values=fn)


def _superexp(blocks: int = SUPEREXP_BLOCKS) -> LacunaryTheta:
    return build_lacunary("Explicit", name="superexp", terms=[2 ** (r * r) for r in range(1, blocks + 1)])


@dataclass
class Catalog:
    moduli: Dict[str, ModulusSpec] = field(default_factory=dict)
    thetas: Dict[str, LacunaryTheta] = field(default_factory=dict)
    sequences: Dict[str, SequenceSpec] = field(default_factory=dict)
    families: tuple = FAMILIES

    def modulus(self, name: str) -> ModulusSpec:
        try:
            return self.moduli[name]
        except KeyError:
            raise BadConfig(f"unknown modulus {name!r}") from None

    def theta(self, name: str) -> LacunaryTheta:
        try:
            return self.thetas[name]
        except KeyError:
            raise BadConfig(f"unknown theta {name!r}") from None

    def sequence(self, name: str) -> SequenceSpec:
        try:
            return self.sequences[name]
        except KeyError:
            raise BadConfig(f"unknown sequence {name!r}") from None

    def add_block(self, block: Dict[str, str]) -> None:
        b = dict(block)
        typ = b.pop("type", None)
        name = b.pop("name", None)
        if not name:
            raise BadConfig(f"catalog block without name: {block}")
        try:
            if typ == "modulus":
                self.moduli[name] = ModulusSpec(name, b.pop("kind"), _floats(b.pop("params", "")),
                                                Compatibility(b.pop("declared_compatibility",
                                                                  b.pop("declared", "Unknown"))))
            elif typ == "theta":
                kind = b.pop("kind")
                if kind == "Explicit":
                    terms = [parse_int(t) for t in b.pop("terms").split(",")]
                    self.thetas[name] = build_lacunary(kind, name=name, terms=terms)
                else:
                    params = _floats(b.pop("params", ""))
                    if kind == "Polynomial":
                        params = tuple(int(p) for p in params)
                    self.thetas[name] = build_lacunary(kind, params, name=name)
            elif typ == "sequence":
                kind = b.pop("kind")
                raw = b.pop("params", "")
                params = (raw,) if kind == "indicator" else _floats(raw)
                self.sequences[name] = _dense(name, kind, params, parse_float(b.pop("limit", "0")))
            else:
                raise BadConfig(f"catalog block {name!r}: type must be modulus, theta or sequence")
        except KeyError as e:
            raise BadConfig(f"catalog block {name!r}: missing key {e}") from None
        except (LacusumError, ValueError) as e:
            if isinstance(e, BadConfig):
                raise
            raise BadConfig(f"catalog block {name!r}: {e}") from None
        if b:
            raise BadConfig(f"catalog block {name!r}: unknown keys {sorted(b)}")


def builtin_catalog() -> Catalog:
    C, I = Compatibility.COMPATIBLE, Compatibility.INCOMPATIBLE
    cat = Catalog()
    for m in (
        ModulusSpec("identity", "Identity", (), C),
        ModulusSpec("powersum", "PowerSum", (0.5, 0.5), C),
        ModulusSpec("powerlog", "PowerPlusLog", (0.5,), C),
        ModulusSpec("xpluslog", "PowerPlusLog", (1.0,), C),
        ModulusSpec("xplusratio", "XPlusRatio", (), C),
        ModulusSpec("log1p", "Log1p", (), I),
        ModulusSpec("lambertw", "LambertW", (), I),
    ):
        cat.moduli[m.name] = m
    cat.thetas["geo2"] = build_lacunary("Geometric", (2.0,), name="geo2")
    cat.thetas["geo1.5"] = build_lacunary("Geometric", (1.5,), name="geo1.5")
    cat.thetas["poly2"] = build_lacunary("Polynomial", (2,), name="poly2")
    cat.thetas["superexp"] = _superexp()
    for name, kind, params, limit in (
        ("zero", "zero", (), 0.0),
        ("const_one", "constant", (1.0,), 1.0),
        ("inv_square", "power", (2.0,), 0.0),
        ("geometric_decay", "geometric_decay", (), 0.0),
        ("squares", "indicator", ("squares",), 0.0),
        ("cubes", "indicator", ("cubes",), 0.0),
        ("pow2", "indicator", ("pow2",), 0.0),
        ("evens", "indicator", ("evens",), 0.0),
        ("alternating", "alternating", (), 0.0),
        ("spikes", "spikes", (), 0.0),
    ):
        cat.sequences[name] = _dense(name, kind, params, limit)
    return cat


def load_catalog(text: str, base: Catalog = None) -> Catalog:
    """Parse a catalog file, extending (a copy of) ``base`` when given."""
    cat = Catalog()
    if base is not None:
        cat.moduli.update(base.moduli)
        cat.thetas.update(base.thetas)
        cat.sequences.update(base.sequences)
    for block in parse_blocks(text):
        cat.add_block(block)
    return cat
