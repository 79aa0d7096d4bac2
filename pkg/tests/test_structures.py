from fractions import Fraction as Q

import pytest

from mdca.algebra import (Derivation, exterior_algebra, graded_commutator,
                          multiply, rational_algebra, truncated_polynomial)
from mdca.coalgebra import (Coderivation, ModuleSpec, TruncationPolicy,
                            coderivation_from_brackets)
from mdca.forms import TwistingCochain, build_D, constant_form
from mdca.graded import GradedBasis, LinearMap, ONE
from mdca.structures import (LieRinehartData, QuasiLieRinehartData,
                             ShLieRinehartData, build_maurer_cartan,
                             build_quasi_mc, check_lie_rinehart,
                             check_sh_lie_rinehart, check_twisting_cochain,
                             extend_anchor_level, extend_bracket_table,
                             extract_structure, jacobi_defect_identity,
                             quasi_to_sh)

from test_forms import (SL2, SL2_PARTIAL, SL2_TABLE, derivation_pair,
                        dg_anchor, exterior_pair, jacobi_violator, tp2)


def g(x):
    return "1|" + x


# ------------------------------------------------- bracket table extension

def tp2_generator_data():
    A = truncated_polynomial("x", 3)
    L = ModuleSpec(A, GradedBasis([("u", 0), ("v", 0)]))
    theta = {"u": LinearMap(A.basis, A.basis, 0,
                            {("x", "x"): ONE, ("x^2", "x^2"): Q(2)}),
             "v": LinearMap(A.basis, A.basis, 0, {("x^2", "x"): ONE})}
    gen_bracket = {("u", "v"): {"1|v": ONE}}
    return L, theta, gen_bracket


def test_extended_bracket_matches_ungraded_formula():
    # the recursive extension through the anomaly law must reproduce the
    # table built with the classical two-term formula
    L, theta, gen_bracket = tp2_generator_data()
    table = extend_bracket_table(L, theta, gen_bracket)
    p = coderivation_from_brackets(L, {2: table})
    _, p_ref, _ = tp2()
    assert p.cor == p_ref.cor


def test_extended_bracket_matches_graded_commutators():
    # same cross-check in the graded case: the extension of the generator
    # commutators agrees with the table of honest operator commutators
    A = exterior_algebra([("q", -1), ("r", -1)])
    dq = Derivation(A, 1, {("1", "q"): ONE, ("r", "q.r"): ONE})
    dr = Derivation(A, 1, {("1", "r"): ONE, ("q", "q.r"): -ONE})
    L, p_ref, t_ref = derivation_pair(A, [("u", "q", dq), ("v", "r", dr)])
    adeg = A.basis.degree
    by_gen = {"u": dq, "v": dr}
    gen_bracket = {}
    for x1 in ("u", "v"):
        for x2 in ("u", "v"):
            if x2 < x1:
                continue
            c = graded_commutator(by_gen[x1], by_gen[x2])
            vec = {}
            for xl, dl in (("u", "q"), ("v", "r")):
                for al, co in c({dl: ONE}).items():
                    s = -ONE if adeg[al] % 2 else ONE
                    vec[L.pair(al, xl)] = s * co
            vec = {k: v for k, v in vec.items() if v}
            if vec:
                gen_bracket[(x1, x2)] = vec
    pairing = {x: d.action for x, d in by_gen.items()}
    table = extend_bracket_table(L, pairing, gen_bracket)
    p = coderivation_from_brackets(L, {2: table}) if table else \
        Coderivation(L, {})
    assert p.cor == p_ref.cor


def test_extended_anchor_matches_scaled_action():
    L, theta, _ = tp2_generator_data()
    t1 = extend_anchor_level(L, {("u",): theta["u"], ("v",): theta["v"]}, 1)
    _, _, t_ref = tp2()
    assert {w: op.entries for w, op in t1.items()} == \
        {w: op.entries for w, op in t_ref.maps[1].items()}


# --------------------------------------------------- ordinary pair checks

def sl2_data():
    return LieRinehartData(SL2, SL2_TABLE, {})


def tp2_data():
    L, theta, gen_bracket = tp2_generator_data()
    table = extend_bracket_table(L, theta, gen_bracket)
    anchor = {w[0]: op for w, op in
              extend_anchor_level(L, {("u",): theta["u"],
                                      ("v",): theta["v"]}, 1).items()}
    return LieRinehartData(L, table, anchor)


def test_check_lie_rinehart_passes():
    assert check_lie_rinehart(sl2_data()) == []
    assert check_lie_rinehart(tp2_data()) == []


def test_check_lie_rinehart_flags_jacobi_failure():
    L, partial, _ = jacobi_violator()
    table = {args: dict(v) for j, tab in partial.cor.items()
             for args, v in tab.items()}
    d = LieRinehartData(L, table, {})
    rep = check_lie_rinehart(d)
    assert any(r["axiom"] == "bracket coderivation squares to zero"
               for r in rep)


def test_check_lie_rinehart_flags_scaled_anchor():
    d = tp2_data()
    scaled = {w[0]: op.scale(2) for w, op in d.anchor.maps[1].items()}
    bad = LieRinehartData(d.L, d.bracket, scaled)
    rep = check_lie_rinehart(bad)
    assert any(r["axiom"] == "anchor twisting identity" for r in rep)
    # the scaled anchor also breaks the anomaly law against the bracket
    assert any(r["axiom"] == "bracket anomaly law" for r in rep)


def test_check_lie_rinehart_flags_non_multilinear_anchor():
    d = tp2_data()
    anchor = {w[0]: op for w, op in d.anchor.maps[1].items()}
    anchor[("x|u")] = anchor[("x|u")].add(
        LinearMap(d.L.over.basis, d.L.over.basis, 0, {("x", "x"): ONE}))
    bad = LieRinehartData(d.L, d.bracket, anchor)
    rep = check_lie_rinehart(bad)
    assert any(r["axiom"] == "anchor module-linearity" for r in rep)


def test_check_lie_rinehart_flags_broken_anomaly():
    # perturb the bracket on a scalar multiple of a generator only: the
    # coderivation still squares to zero degreewise here, but the scaling
    # law must notice
    d = tp2_data()
    table = {k: dict(v) for k, v in d.bracket.items()}
    key = (("x|u"), ("1|v"))
    for k, v in list(table.items()):
        if set(k) == set(key):
            v[g("u")] = v.get(g("u"), Q(0)) + 1
    bad = LieRinehartData(d.L, table, {w[0]: op for w, op in
                                       d.anchor.maps[1].items()})
    rep = check_lie_rinehart(bad)
    assert any(r["axiom"] == "bracket anomaly law" for r in rep)


# ------------------------------------------------------ twisting reports

def test_check_twisting_cochain_reports():
    L, partial, t = tp2()
    assert check_twisting_cochain(L, t, partial, TruncationPolicy(3)) == []
    L2, partial2, t2 = tp2(scale=2)
    rep = check_twisting_cochain(L2, t2, partial2, TruncationPolicy(3))
    assert rep and all(r["level"] == 2 for r in rep)
    assert any(r["word"] == ("1|u", "1|v") for r in rep)


# ---------------------------------------------------- homotopy pair checks

def test_check_sh_lie_rinehart_passes():
    d = ShLieRinehartData(*tp2())
    assert check_sh_lie_rinehart(d, TruncationPolicy(3)) == []
    d = ShLieRinehartData(*exterior_pair())
    assert check_sh_lie_rinehart(d, TruncationPolicy(2)) == []


def test_check_sh_lie_rinehart_flags_invalid_dg_anchor():
    # nonzero base and module differentials with an anchor value that is
    # not a cycle: the residuals must show up on both routes
    d = ShLieRinehartData(*dg_anchor())
    rep = check_sh_lie_rinehart(d, TruncationPolicy(3))
    routes = {r["route"] for r in rep}
    assert "direct" in routes and "operators" in routes
    assert "cross-check" not in routes


def test_check_sh_lie_rinehart_routes_agree_on_failure():
    d = ShLieRinehartData(*jacobi_violator())
    rep = check_sh_lie_rinehart(d, TruncationPolicy(3))
    routes = {r["route"] for r in rep}
    assert "direct" in routes and "operators" in routes
    assert "cross-check" not in routes


# ----------------------------------------- construction and extraction

def roundtrip_case(case, W):
    L, partial, t = case
    d = ShLieRinehartData(L, partial, t)
    m = build_maurer_cartan(d, TruncationPolicy(W))
    back, flags = extract_structure(m, TruncationPolicy(W))
    assert flags == []
    assert back.partial.cor == partial.cor
    assert {j: {w: op.entries for w, op in tab.items()}
            for j, tab in back.t.maps.items()} == \
        {j: {w: op.entries for w, op in tab.items()}
         for j, tab in t.maps.items()}


def test_round_trip_extraction():
    roundtrip_case((SL2, SL2_PARTIAL, TwistingCochain(SL2, {})), 3)
    roundtrip_case(tp2(), 3)
    roundtrip_case(exterior_pair(), 2)
    # the contractible-base differentials round trip once the incompatible
    # anchor is dropped; with it the structure is invalid and build refuses
    L, partial, t = dg_anchor()
    roundtrip_case((L, partial, TwistingCochain(L, {})), 3)
    with pytest.raises(ValueError):
        build_maurer_cartan(ShLieRinehartData(L, partial, t),
                            TruncationPolicy(3))


def test_build_refuses_non_multilinear_anchor():
    L, partial, t = tp2()
    t1 = {w: op for w, op in t.maps[1].items()}
    t1[("x|u",)] = t1[("x|u",)].add(
        LinearMap(L.over.basis, L.over.basis, 0, {("x", "x"): ONE}))
    bad = ShLieRinehartData(L, partial, TwistingCochain(L, {1: t1}))
    with pytest.raises(ValueError):
        build_maurer_cartan(bad, TruncationPolicy(2))


def test_extraction_flags_tampered_structure():
    # the level-0 tables are pinned by the differentials, so corrupting
    # one cannot be absorbed into candidate brackets or anchors
    L, partial, t = exterior_pair()
    d = ShLieRinehartData(L, partial, t)
    m = build_maurer_cartan(d, TruncationPolicy(2))
    f = m.on_duals[0]["u"]
    from mdca.forms import FormTable
    m.on_duals[0]["u"] = f.add(FormTable(L, f.degree, {("q|u",): {"q.r": 1}}))
    back, flags = extract_structure(m, TruncationPolicy(2))
    assert flags
    assert back is not None


# ------------------------------------------------------------ quasi layer

def tp2_as_quasi():
    d = tp2_data()
    pairing = {w[0]: op for w, op in d.anchor.maps[1].items()}
    return QuasiLieRinehartData(d.L, d.bracket, pairing, {})


def test_quasi_validation_and_conversion():
    q = tp2_as_quasi()
    assert q.validation_report() == []
    sh = quasi_to_sh(q)
    _, p_ref, t_ref = tp2()
    assert sh.partial.cor == p_ref.cor
    assert {w: op.entries for w, op in sh.t.maps[1].items()} == \
        {w: op.entries for w, op in t_ref.maps[1].items()}
    assert 2 not in sh.t.maps


def test_quasi_mc_representations_agree():
    # the alternating-form formulas and the coalgebra operators must give
    # the same generator tables
    q = tp2_as_quasi()
    m = build_quasi_mc(q, TruncationPolicy(3))
    assert m.levels() == [0, 1, 2]


def test_jacobi_defect_trivial_for_ordinary_pair():
    q = tp2_as_quasi()
    out = jacobi_defect_identity(q)
    assert out["mismatches"] == []
