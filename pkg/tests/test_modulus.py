import math

import numpy as np
import pytest
from scipy.special import lambertw as sp_lambertw

from lacusum.errors import GridTooCoarse, InvalidHorizon, InvalidParams, NegativeInput
from lacusum.lacunary import build_lacunary
from lacusum.modulus import (Compatibility, ModulusSpec, check_modulus_axioms,
                             classify_compatibility, lambertw, phi_estimate)


def spec(kind, params=(), declared="Unknown", name=None, evaluator=None):
    return ModulusSpec(name or kind, kind, params, declared, evaluator)


def test_powersum_values():
    f = spec("PowerSum", (0.5, 0.5))
    assert f(4.0) == 4.0
    assert f(0.0) == 0.0


def test_xplusratio_and_log1p():
    assert spec("XPlusRatio")(1.0) == 1.5
    assert spec("Log1p")(math.e - 1) == pytest.approx(1.0, abs=1e-15)


def test_negative_input_rejected():
    with pytest.raises(NegativeInput):
        spec("Identity")(-1.0)
    with pytest.raises(NegativeInput):
        spec("Log1p")(np.array([1.0, -0.5]))


def test_bad_params():
    with pytest.raises(InvalidParams):
        spec("PowerSum", (0.5,))
    with pytest.raises(InvalidParams):
        spec("PowerPlusLog", (1.5,))
    with pytest.raises(InvalidParams):
        spec("Custom")
    with pytest.raises(InvalidParams):
        spec("Quadratic")


def test_lambertw_matches_scipy():
    x = np.concatenate([[0.0], np.geomspace(1e-8, 1e12, 400)])
    w = lambertw(x)
    ref = sp_lambertw(x).real
    assert np.allclose(w, ref, rtol=1e-12, atol=1e-14)
    # defining identity
    assert np.allclose(w * np.exp(w), x, rtol=1e-11, atol=1e-14)


def test_lambertw_e():
    assert float(lambertw(math.e)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("kind,params", [
    ("Identity", ()), ("PowerSum", (0.5, 0.5)), ("PowerSum", (0.3, 1.0)),
    ("PowerPlusLog", (0.5,)), ("XPlusRatio", ()), ("Log1p", ()), ("LambertW", ()),
])
def test_builtin_kinds_pass_axioms(kind, params):
    rep = check_modulus_axioms(spec(kind, params), 1e6, 200)
    assert rep.all_ok, rep.as_dict()


def test_square_not_subadditive():
    sq = spec("Custom", name="square", evaluator=lambda x: x * x)
    rep = check_modulus_axioms(sq, 100.0, 50)
    assert not rep.subadditive_ok
    x, y = rep.witnesses["subadditive"]
    assert sq(x + y) > sq(x) + sq(y)


def test_bounded_flagged():
    bounded = spec("Custom", name="bounded", evaluator=lambda x: x / (1.0 + x))
    rep = check_modulus_axioms(bounded, 1e8, 100)
    assert not rep.unbounded_ok
    assert rep.subadditive_ok


def test_identity_phi_exact():
    for eps in (0.5, 0.25, 0.1):
        est = phi_estimate(spec("Identity"), eps, 10**5)
        assert abs(est.value - eps) <= 1e-12
        assert est.plateau


def test_powersum_phi_sqrt():
    est = phi_estimate(spec("PowerSum", (0.5, 0.5)), 0.04, 10**5)
    assert est.value == pytest.approx(0.2, abs=1e-12)


def test_log1p_phi_direct_oracle():
    # tail max over [n/2, n] of log(1 + n eps) / log(1 + n) is attained at n
    n = 10**5
    est = phi_estimate(spec("Log1p"), 0.01, n)
    assert est.value == pytest.approx(math.log1p(n * 0.01) / math.log1p(n), rel=1e-12)
    assert est.mode == "Global"


def test_phi_theta_uses_block_lengths():
    theta = build_lacunary("Geometric", (2.0,), name="geo2")
    est = phi_estimate(spec("Log1p"), 0.01, 2**20, theta)
    h = 2**20  # the horizon caps block lengths in lacunary mode
    assert est.value == pytest.approx(math.log1p(h * 0.01) / math.log1p(h), rel=1e-12)
    assert est.theta == "geo2"


def test_phi_bad_horizon():
    with pytest.raises(InvalidHorizon):
        phi_estimate(spec("Identity"), 0.1, 10)


def test_classify():
    assert classify_compatibility(spec("Identity")).verdict is Compatibility.COMPATIBLE
    assert classify_compatibility(spec("PowerSum", (0.5, 0.5))).verdict is Compatibility.COMPATIBLE
    assert classify_compatibility(spec("Log1p")).verdict is not Compatibility.COMPATIBLE


def test_classify_conflict_flag():
    wrong = spec("Identity", declared="Incompatible", name="mislabelled")
    cls = classify_compatibility(wrong)
    assert cls.conflict
    assert cls.verdict is Compatibility.COMPATIBLE


def test_classify_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        classify_compatibility(spec("Identity"), eps_grid=(0.1, 0.01))
    with pytest.raises(GridTooCoarse):
        classify_compatibility(spec("Identity"), eps_grid=(0.1, 0.2, 0.01, 0.001))
