import json
import os

import pytest

from lacusum.catalog import builtin_catalog, load_catalog, parse_blocks
from lacusum.convergence import test_statistical as stat, test_strong_cesaro as cesaro
from lacusum.errors import BadConfig, UnknownLaw
from lacusum.harness import (CONSISTENT, INCONCLUSIVE, LAWS, VIOLATED, Lab, default_horizon,
                             equivalent, implies, run_inclusion_check, run_suite, write_report)
from lacusum.modulus import Compatibility


@pytest.fixture(scope="module")
def lab():
    return Lab()


def test_catalog_contents():
    cat = builtin_catalog()
    assert cat.moduli["log1p"].declared is Compatibility.INCOMPATIBLE
    assert cat.moduli["xplusratio"].declared is Compatibility.COMPATIBLE
    assert {"geo2", "geo1.5", "poly2", "superexp"} <= set(cat.thetas)
    assert len(cat.sequences) == 10


def test_thirteen_laws():
    assert len(LAWS) == 13


def test_parse_blocks():
    blocks = parse_blocks("a=1\nb = 2e3 # note\n\n\n# only comment\nc=x\n")
    assert blocks == [{"a": "1", "b": "2e3"}, {"c": "x"}]
    with pytest.raises(BadConfig):
        parse_blocks("novalue\n")
    with pytest.raises(BadConfig):
        parse_blocks("a=1\na=2\n")


def test_load_catalog_file():
    text = ("type=modulus\nname=sq3\nkind=PowerSum\nparams=0.3,0.7\n"
            "declared_compatibility=Compatible\n\n"
            "type=theta\nname=geo3\nkind=Geometric\nparams=3\n\n"
            "type=sequence\nname=half\nkind=constant\nparams=0.5\nlimit=0.5\n")
    cat = load_catalog(text, builtin_catalog())
    assert cat.moduli["sq3"].params == (0.3, 0.7)
    assert cat.thetas["geo3"].k(3) == 27
    assert cat.sequences["half"].limit == 0.5
    with pytest.raises(BadConfig):
        load_catalog("type=theta\nname=t\nkind=Geometric\nparams=1\n")
    with pytest.raises(BadConfig):
        load_catalog("type=sequence\nname=s\nkind=zero\ncolour=red\n")


def test_default_horizon():
    cat = builtin_catalog()
    assert default_horizon(cat.thetas["geo2"]) == 10**7  # k_40 = 2^40, capped
    assert default_horizon(cat.thetas["poly2"]) == 10**6
    assert default_horizon(cat.thetas["superexp"]) == 10**7


def test_implication_table():
    class V:
        def __init__(self, s):
            self.holds, self.fails = s == "H", s == "F"
    assert implies(V("H"), V("F")) == VIOLATED
    assert implies(V("H"), V("H")) == CONSISTENT
    assert implies(V("F"), V("I")) == CONSISTENT
    assert implies(V("I"), V("F")) == INCONCLUSIVE
    assert implies(V("H"), V("I")) == INCONCLUSIVE
    assert equivalent(V("F"), V("H")) == VIOLATED
    assert equivalent(V("F"), V("F")) == CONSISTENT


def test_example_summable_residual(lab):
    tv = run_inclusion_check("N_theta_f_subset_S_theta_f", "log1p", "geo2", "inv_square",
                             10**6, lab)
    assert tv.status == CONSISTENT
    seq = lab.catalog.sequences["inv_square"]
    f, th = lab.catalog.moduli["log1p"], lab.catalog.thetas["geo2"]
    # oracle: direct verdict computation
    assert cesaro(seq, f, th, 10**6).holds and stat(seq, f, th, 10**6).holds
    assert tv.evidence["antecedent"].holds and tv.evidence["consequent"].holds


def test_example_identity_evens(lab):
    tv = run_inclusion_check("S_theta_eq_S_theta_f", "identity", "geo2", "evens", 10**6, lab)
    assert tv.status == CONSISTENT
    assert tv.evidence["antecedent"].fails and tv.evidence["consequent"].fails


def test_example_converse_stat(lab):
    tv = run_inclusion_check("converse_theta_compat_stat", "log1p", "geo2", lab=lab)
    assert tv.status == CONSISTENT
    assert tv.evidence["plain"].holds
    assert tv.evidence["modulated"].fails
    assert tv.sequence == "reciproco"


def test_vacuous_when_hypothesis_false(lab):
    tv = run_inclusion_check("converse_theta_compat_stat", "identity", "geo2", lab=lab)
    assert tv.status == CONSISTENT and tv.note.startswith("vacuous")


def test_swap_detects_violation(lab):
    tv = run_inclusion_check("N_theta_f_subset_S_theta_f", "identity", "geo2", "spikes",
                             None, lab, swap=True)
    assert tv.status == VIOLATED
    assert all(v.decided for v in tv.evidence.values())


def test_swap_rejected_on_equality(lab):
    with pytest.raises(BadConfig):
        run_inclusion_check("S_theta_eq_S_theta_f", "identity", "geo2", "evens", lab=lab,
                            swap=True)


def test_unknown_law(lab):
    with pytest.raises(UnknownLaw):
        run_inclusion_check("no_such_law", "identity", "geo2", "zero", lab=lab)


def test_empty_config(tmp_path):
    rep = run_suite("")
    assert rep.results == [] and rep.violated == 0
    write_report(rep, str(tmp_path))
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["header"]["instances"] == 0


def test_bad_config():
    with pytest.raises(BadConfig):
        run_suite("law=bogus\n")
    with pytest.raises(BadConfig):
        run_suite("law=*\nmodulus=nosuch\n")
    with pytest.raises(BadConfig):
        run_suite("modulus=identity\n")
    with pytest.raises(BadConfig):
        run_suite("law=*\nswap=true\n")


def test_suite_order_and_outputs(tmp_path, lab):
    cfg = ("law=N_theta_f_eq_N_theta\nmodulus=identity,log1p\ntheta=geo2\n"
           "sequence=zero,evens\n\n"
           "law=N_theta_f_subset_N_theta\nmodulus=identity\ntheta=geo2\nsequence=zero\n")
    rep = run_suite(cfg, lab=lab, threads=3)
    laws = [r.law for r in rep.results]
    assert laws == ["N_theta_f_subset_N_theta"] + ["N_theta_f_eq_N_theta"] * 4
    assert [r.instance for r in rep.results[1:]] == [
        ("identity", "geo2", "zero"), ("identity", "geo2", "evens"),
        ("log1p", "geo2", "zero"), ("log1p", "geo2", "evens")]
    write_report(rep, str(tmp_path))
    assert (tmp_path / "report.csv").read_text().count("\n") == 6
    assert len(os.listdir(tmp_path / "trajectories")) >= 3


def test_threads_deterministic(lab):
    cfg = "law=P5_liminf_forward\nmodulus=identity\ntheta=geo2,geo1.5\n"
    a = [r.as_dict() for r in run_suite(cfg, lab=lab, threads=1).results]
    b = [r.as_dict() for r in run_suite(cfg, lab=Lab(), threads=4).results]
    assert a == b
