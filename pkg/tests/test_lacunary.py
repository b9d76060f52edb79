import pytest

from lacusum.errors import BadParams, NotIncreasing, NotLacunary
from lacusum.lacunary import block_stats, build_lacunary, in_block, ratio_profile


def geo2():
    return build_lacunary("Geometric", (2.0,), name="geo2")


def test_geometric_terms():
    th = geo2()
    assert th.terms(5) == [0, 2, 4, 8, 16, 32]
    assert th.h(3) == 4
    assert th.q(4) == 2.0


def test_geometric_1_5_dedups():
    th = build_lacunary("Geometric", (1.5,))
    ks = th.terms(30)
    assert all(b > a for a, b in zip(ks, ks[1:]))


def test_polynomial():
    th = build_lacunary("Polynomial", (2,))
    assert th.terms(4) == [0, 1, 4, 9, 16]
    assert [th.h(r) for r in range(1, 5)] == [1, 3, 5, 7]


def test_block_of_and_in_block():
    th = geo2()
    assert th.block_of(1) == 1
    assert th.block_of(2) == 1
    assert th.block_of(3) == 2
    assert th.block_of(1025) == 11
    assert in_block(th, 1025, 11)
    assert not in_block(th, 1024, 11)


def test_block_stats():
    s = block_stats(geo2(), 10)
    assert s.as_tuple() == (512, 1024, 512, 2.0)


def test_blocks_within():
    th = geo2()
    assert th.blocks_within(1024) == 10
    assert th.blocks_within(1023) == 9


def test_explicit_finite():
    th = build_lacunary("Explicit", terms=[3, 30, 300, 3000], name="ex")
    assert th.available == 4
    assert th.blocks_within(10**9) == 4
    with pytest.raises(IndexError):
        th.k(5)


def test_not_increasing():
    with pytest.raises(NotIncreasing):
        build_lacunary("Explicit", terms=[5, 50, 40, 400], name="bad")


def test_not_lacunary():
    with pytest.raises(NotLacunary):
        build_lacunary("Explicit", terms=[1, 2, 3, 4], name="short")


def test_bad_params():
    with pytest.raises(BadParams):
        build_lacunary("Geometric", (1.0,))
    with pytest.raises(BadParams):
        build_lacunary("Polynomial", (1,))
    with pytest.raises(BadParams):
        build_lacunary("Fibonacci")


def test_custom_generator():
    th = build_lacunary("Custom", generator=lambda r: 3 ** r, name="geo3")
    assert th.k(4) == 81


def test_ratio_profile_geo2():
    p = ratio_profile(geo2(), 1000)
    assert p.liminf_est == 2.0 and p.limsup_est == 2.0
    assert not p.unbounded_flag


def test_ratio_profile_poly2_direct_formula():
    R = 1000
    p = ratio_profile(build_lacunary("Polynomial", (2,)), R)
    tail = [r * r / (r - 1) ** 2 for r in range(R // 2, R + 1)]
    assert p.liminf_est == pytest.approx(min(tail), rel=1e-15)
    assert p.limsup_est == pytest.approx(max(tail), rel=1e-15)
    assert p.liminf_est == pytest.approx(1.002, abs=1e-3)
    assert p.limsup_est == pytest.approx(1.004, abs=1e-3)
    assert not p.unbounded_flag


def test_ratio_profile_superexp():
    th = build_lacunary("Explicit", terms=[2 ** (r * r) for r in range(1, 31)], name="se")
    p = ratio_profile(th, 30)
    assert p.unbounded_flag
    assert p.limsup_est == 2.0 ** 59


def test_ratio_profile_small_R():
    with pytest.raises(BadParams):
        ratio_profile(geo2(), 5)
