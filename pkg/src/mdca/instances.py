"""Built-in example catalog.

Each entry returns (structure data, truncation policy).  The canonical
file form of an entry is produced by io_json.emit_instance; the command
line exposes them under catalog: names.

Entries:
  abelian          rank-2 module over the rationals, zero bracket.
  heisenberg       three generators with [x, y] = z.
  sl2              the classical three-dimensional simple Lie algebra.
  jacobi_violator  a deliberately broken bracket whose Jacobi sum on
                   (x, y, z) is -(x + y + z); shipped as a negative
                   control and expected to fail checks.
  exterior_pair    derivations of an exterior algebra on two odd
                   generators, with commutator bracket and the action
                   itself as anchor.
  truncated_poly   derivations of Q[x]/(x^3), presented as a free rank-2
                   module on x d/dx and x^2 d/dx.  The honest derivation
                   module is not free (x^2 * x d/dx = x * x^2 d/dx), so
                   this is a free presentation mapping onto it, kept as a
                   documented boundary case of the freeness assumption.
  quasi_sample     machine-derived structure with a nonzero module
                   differential and a nonzero trilinear defect; the
                   coefficients were found by the committed solver script
                   (tools/solve_quasi.py) and are re-verified by tests.
"""

from fractions import Fraction as Q

from .algebra import (Derivation, exterior_algebra, graded_commutator,
                      multiply, rational_algebra, truncated_polynomial)
from .coalgebra import ModuleSpec, TruncationPolicy, coderivation_from_brackets
from .forms import TwistingCochain
from .graded import GradedBasis, LinearMap, ONE
from .structures import (LieRinehartData, QuasiLieRinehartData,
                         ShLieRinehartData, extend_anchor_level,
                         extend_bracket_table)


def _g(x):
    return "1|" + x


def abelian():
    L = ModuleSpec(rational_algebra(), GradedBasis([("u", 0), ("v", 0)]))
    return LieRinehartData(L, {}, {}), TruncationPolicy(4)


def heisenberg():
    L = ModuleSpec(rational_algebra(),
                   GradedBasis([("x", 0), ("y", 0), ("z", 0)]))
    table = {(_g("x"), _g("y")): {_g("z"): ONE}}
    return LieRinehartData(L, table, {}), TruncationPolicy(4)


def sl2():
    L = ModuleSpec(rational_algebra(),
                   GradedBasis([("e", 0), ("f", 0), ("h", 0)]))
    table = {
        (_g("e"), _g("f")): {_g("h"): ONE},
        (_g("e"), _g("h")): {_g("e"): Q(-2)},
        (_g("f"), _g("h")): {_g("f"): Q(2)},
    }
    return LieRinehartData(L, table, {}), TruncationPolicy(4)


def jacobi_violator():
    L = ModuleSpec(rational_algebra(),
                   GradedBasis([("x", 0), ("y", 0), ("z", 0)]))
    table = {
        (_g("x"), _g("y")): {_g("x"): ONE},
        (_g("y"), _g("z")): {_g("y"): ONE},
        (_g("x"), _g("z")): {_g("z"): -ONE},
    }
    return LieRinehartData(L, table, {}), TruncationPolicy(4)


def derivation_pair(A, base):
    """Homotopy data for a module of derivations, free on the given
    generators, with commutator bracket and the action as anchor.

    base: list of (module generator label, algebra generator label,
    Derivation); the bracket table comes from genuine graded commutators
    decomposed through the values on the named algebra generators.
    """
    L = ModuleSpec(A, GradedBasis([(x, d.degree) for x, _, d in base]))
    by_gen = {x: d for x, _, d in base}
    adeg = A.basis.degree

    def as_derivation(label):
        # the element a.x acts as (-1)^|a| a d_x: the sign of moving the
        # scalar across a degree -1 operator family
        a, x = L.split(label)
        d0 = by_gen[x]
        s = -ONE if adeg[a] % 2 else ONE
        ent = {}
        for src in A.basis.labels:
            for k, c in multiply(A, {a: ONE}, d0({src: ONE})).items():
                ent[(k, src)] = s * c
        return Derivation(A, adeg[a] + d0.degree, ent)

    table = {}
    for g1 in L.l_basis.labels:
        for g2 in L.l_basis.labels:
            c = graded_commutator(as_derivation(g1), as_derivation(g2))
            vec = {}
            for xl, dl, _ in base:
                for al, co in c({dl: ONE}).items():
                    s = -ONE if adeg[al] % 2 else ONE
                    vec[L.pair(al, xl)] = s * co
            vec = {k: v for k, v in vec.items() if v}
            if vec:
                table[(g1, g2)] = vec
    partial = coderivation_from_brackets(L, {2: table})
    t1 = {}
    for label in L.l_basis.labels:
        d = as_derivation(label)
        if not d.is_zero():
            t1[(label,)] = d.action
    return ShLieRinehartData(L, partial, TwistingCochain(L, {1: t1}))


def exterior_pair():
    A = exterior_algebra([("q", -1), ("r", -1)])
    dq = Derivation(A, 1, {("1", "q"): ONE, ("r", "q.r"): ONE})
    dr = Derivation(A, 1, {("1", "r"): ONE, ("q", "q.r"): -ONE})
    return derivation_pair(A, [("u", "q", dq), ("v", "r", dr)]), \
        TruncationPolicy(4)


def truncated_poly():
    A = truncated_polynomial("x", 3)
    L = ModuleSpec(A, GradedBasis([("u", 0), ("v", 0)]))
    theta = {"u": LinearMap(A.basis, A.basis, 0,
                            {("x", "x"): ONE, ("x^2", "x^2"): Q(2)}),
             "v": LinearMap(A.basis, A.basis, 0, {("x^2", "x"): ONE})}
    gen_bracket = {("u", "v"): {"1|v": ONE}}
    table = extend_bracket_table(L, theta, gen_bracket)
    anchor = {w[0]: op for w, op in
              extend_anchor_level(L, {("u",): theta["u"],
                                      ("v",): theta["v"]}, 1).items()}
    return LieRinehartData(L, table, anchor), TruncationPolicy(4)


# Parameters of quasi_sample, found by tools/solve_quasi.py and pinned
# here; the derivation is re-verified by the test suite.
QUASI_PARAMS = (
    {("x", "y"): {"1|x": ONE},           # generator bracket; its Jacobi
     ("y", "z"): {"1|y": ONE},           # sum on (x, y, z) is -x, matched
     ("x", "z"): {"1|x": -ONE}},         # by the differentiated triple
    {"x": 0, "y": 0, "z": 0},            # anchor weights (zero pairing)
    {"x": {"x": 1}},                     # differential matrix
    {("y", "z"): 1},                     # triple coefficients
)


def quasi_sample():
    if QUASI_PARAMS is None:
        raise NotImplementedError("quasi_sample parameters pending")
    preset, lam, dmat, cs = QUASI_PARAMS
    return build_quasi_sample(preset, lam, dmat, cs), TruncationPolicy(4)


def build_quasi_sample(gen_bracket, lam, dmat, cs):
    """Quasi structure over an exterior line from solver parameters.

    gen_bracket: generator bracket table; lam: anchor weights on theta
    d/dtheta per generator; dmat: differential matrix (d of generator i
    is theta times the i-th row); cs: triple coefficients per sorted
    generator pair, as multiples of d/dtheta.
    """
    A = exterior_algebra([("th", -1)])
    gens = sorted({x for key in gen_bracket for x in key}
                  | {x for v in gen_bracket.values()
                     for lbl in v for x in [lbl.split("|")[1]]}
                  | set(lam))
    L0 = ModuleSpec(A, GradedBasis([(g, 0) for g in gens]))
    diff = {}
    for gi, row in dmat.items():
        for gj, m in row.items():
            if m:
                diff[("th|" + gj, "1|" + gi)] = Q(m)
    L = ModuleSpec(A, GradedBasis([(g, 0) for g in gens]),
                   LinearMap(L0.l_basis, L0.l_basis, -1, diff))
    pairing_gens = {}
    for g, w in lam.items():
        if w:
            pairing_gens[g] = LinearMap(A.basis, A.basis, 0,
                                        {("th", "th"): Q(w)})
    pairing = {w[0]: op for w, op in extend_anchor_level(
        L, {(g,): op for g, op in pairing_gens.items()}, 1).items()}
    bracket = extend_bracket_table(L, pairing_gens, gen_bracket)
    triple = {}
    for key, c in cs.items():
        if c:
            triple[key] = LinearMap(A.basis, A.basis, 1,
                                    {("1", "th"): Q(c)})
    return QuasiLieRinehartData(L, bracket, pairing, triple)


CATALOG = {
    "abelian": abelian,
    "heisenberg": heisenberg,
    "sl2": sl2,
    "jacobi_violator": jacobi_violator,
    "exterior_pair": exterior_pair,
    "truncated_poly": truncated_poly,
    "quasi_sample": quasi_sample,
}


def catalog_names():
    return sorted(CATALOG)


def catalog_entry(name):
    if name not in CATALOG:
        raise KeyError("unknown catalog entry %r (have: %s)"
                       % (name, ", ".join(catalog_names())))
    return CATALOG[name]()
