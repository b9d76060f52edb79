import math

import pytest

from lacusum.catalog import builtin_catalog
from lacusum.counterexamples import (build_block_indicator_sequence, build_reciproco_sequence,
                                     build_sember_gap_sequence, build_th3_sequence)
from lacusum.errors import BadParams, BoundedRatios, CompatibleModulus

CAT = builtin_catalog()
LOG = CAT.moduli["log1p"]
GEO2 = CAT.thetas["geo2"]


@pytest.fixture(scope="module")
def reciproco():
    return build_reciproco_sequence(LOG, GEO2)


def test_reciproco_sizes(reciproco):
    w = reciproco
    assert len(w.witness_blocks) == 5
    assert w.eps_skipped == [1.0]
    for r, n, e in zip(w.witness_blocks, w.witness_sizes, w.witness_eps):
        h = 2 ** (r - 1)
        assert n == math.floor(h * e) + 1
        assert n < h


def test_reciproco_segments_end_blocks(reciproco):
    for (a, b, v), r, n in zip(reciproco.seq.segments, reciproco.witness_blocks,
                               reciproco.witness_sizes):
        assert b == GEO2.k(r) and b - a + 1 == n and v == 1.0


def test_reciproco_separation_constant(reciproco):
    w = reciproco
    for r, e in zip(w.witness_blocks, w.witness_eps):
        h = GEO2.h(r)
        assert math.log1p(h * e) / math.log1p(h) >= w.c_target
    assert w.separation_c >= w.c_target


def test_compatible_modulus_rejected():
    with pytest.raises(CompatibleModulus):
        build_reciproco_sequence(CAT.moduli["identity"], GEO2)


def test_bad_eps_sequences():
    with pytest.raises(BadParams):
        build_reciproco_sequence(LOG, GEO2, [0.5, 0.25, 0.3, 0.1, 0.05])
    with pytest.raises(BadParams):
        build_reciproco_sequence(LOG, GEO2, [0.5, 0.25])
    with pytest.raises(BadParams):
        build_reciproco_sequence(LOG, GEO2, K=2)


def test_th3_bounded_block_values():
    w = build_th3_sequence(LOG, GEO2)
    vals = [v for _, _, v in w.seq.segments]
    assert max(vals) <= 1.0
    assert vals == sorted(vals, reverse=True)
    for (a, b, _), r in zip(w.seq.segments, w.witness_blocks):
        assert (a, b) == (GEO2.k(r - 1) + 1, GEO2.k(r))


def test_sember_selection():
    th = CAT.thetas["superexp"]
    w = build_sember_gap_sequence(th, x0=2.0, J=4)
    sel = w.witness_blocks
    for j, r in enumerate(sel):
        assert th.q(r) > j
    assert all(v == 2.0 for _, _, v in w.seq.segments)
    assert w.witness_prefixes["zero"] == [2 * th.k(r) for r in sel[:-1]]


def test_sember_needs_unbounded():
    with pytest.raises(BoundedRatios):
        build_sember_gap_sequence(GEO2)
    with pytest.raises(BadParams):
        build_sember_gap_sequence(CAT.thetas["superexp"], x0=0.0)


def test_block_indicator_poly2():
    th = CAT.thetas["poly2"]
    w = build_block_indicator_sequence(th, 10**7)
    assert all(th.q(r) <= 1.05 for r in w.witness_blocks)
    assert len(w.witness_blocks) >= 3
    with pytest.raises(BadParams):
        build_block_indicator_sequence(GEO2, 10**7)
