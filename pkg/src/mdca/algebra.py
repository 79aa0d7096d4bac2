"""Finite-dimensional differential graded commutative algebras over Q.

An algebra is given by an explicit basis, structure constants, a
distinguished unit basis element and a degree -1 differential.  Derivations
are solved for exactly from the Leibniz linear system.
"""

from fractions import Fraction as Q

from .graded import (GradedBasis, LinearMap, ONE, ZERO, compose,
                     kernel_of_rows, vec_axpy, vec_scale)


class AlgebraSpec:
    """Graded commutative unital dg algebra with structure constants.

    mult maps a label pair (i, j) to the sparse product vector i*j; pairs
    with zero product may be omitted.
    """

    def __init__(self, basis, unit, mult, diff=None):
        self.basis = basis
        self.unit = unit
        if unit not in basis.degree:
            raise ValueError("unit label %r not in basis" % (unit,))
        self.mult = {}
        for (i, j), vec in mult.items():
            v = {k: Q(c) for k, c in vec.items() if Q(c)}
            if v:
                self.mult[(i, j)] = v
        if diff is None:
            diff = LinearMap.zero(basis, basis, -1)
        self.diff = diff

    def prod_basis(self, i, j):
        return self.mult.get((i, j), {})

    def one(self):
        return {self.unit: ONE}


def multiply(A, a, b):
    """Bilinear extension of the structure constants to elements."""
    out = {}
    for i, ci in a.items():
        if i not in A.basis.degree:
            raise ValueError("unknown label %r" % (i,))
        for j, cj in b.items():
            if j not in A.basis.degree:
                raise ValueError("unknown label %r" % (j,))
            vec_axpy(out, ci * cj, A.prod_basis(i, j))
    return out


def validate_algebra(A):
    """Check every AlgebraSpec invariant; returns a list of violations.

    Each violation is a dict naming the invariant and the witnessing basis
    tuple.  Empty list means the spec is a genuine dg commutative algebra.
    """
    report = []
    deg = A.basis.degree
    labels = A.basis.labels

    for (i, j), vec in A.mult.items():
        if i not in deg or j not in deg:
            report.append({"invariant": "mult labels", "witness": (i, j)})
            continue
        for k, c in vec.items():
            if deg[k] != deg[i] + deg[j]:
                report.append({"invariant": "degree additivity",
                               "witness": (i, j, k)})

    u = A.unit
    for a in labels:
        if A.prod_basis(u, a) != {a: ONE} or A.prod_basis(a, u) != {a: ONE}:
            report.append({"invariant": "unit law", "witness": (a,)})

    for i in labels:
        for j in labels:
            lhs = A.prod_basis(i, j)
            sgn = -ONE if (deg[i] % 2 and deg[j] % 2) else ONE
            rhs = vec_scale(sgn, A.prod_basis(j, i))
            if lhs != rhs:
                report.append({"invariant": "graded commutativity",
                               "witness": (i, j)})

    for i in labels:
        for j in labels:
            ij = A.prod_basis(i, j)
            for k in labels:
                lhs = multiply(A, ij, {k: ONE})
                rhs = multiply(A, {i: ONE}, A.prod_basis(j, k))
                if lhs != rhs:
                    report.append({"invariant": "associativity",
                                   "witness": (i, j, k)})

    if A.diff.degree != -1:
        report.append({"invariant": "diff degree -1", "witness": ()})
    if not compose(A.diff, A.diff).is_zero():
        report.append({"invariant": "diff squares to zero", "witness": ()})
    for i in labels:
        for j in labels:
            lhs = A.diff.apply(A.prod_basis(i, j))
            rhs = multiply(A, A.diff.column(i), {j: ONE})
            sgn = -ONE if deg[i] % 2 else ONE
            vec_axpy(rhs, sgn, multiply(A, {i: ONE}, A.diff.column(j)))
            if lhs != rhs:
                report.append({"invariant": "Leibniz rule of diff",
                               "witness": (i, j)})
    return report


class Derivation:
    """Degree-homogeneous derivation of an AlgebraSpec."""

    def __init__(self, of, degree, action):
        self.of = of
        self.degree = int(degree)
        if isinstance(action, LinearMap):
            if action.degree != self.degree:
                raise ValueError("action degree mismatch")
            self.action = action
        else:
            self.action = LinearMap(of.basis, of.basis, self.degree, action)

    def __call__(self, vec):
        return self.action.apply(vec)

    def __eq__(self, other):
        return (isinstance(other, Derivation) and self.degree == other.degree
                and self.action == other.action)

    def is_zero(self):
        return self.action.is_zero()

    def leibniz_violations(self):
        A = self.of
        deg = A.basis.degree
        bad = []
        for i in A.basis.labels:
            for j in A.basis.labels:
                lhs = self(A.prod_basis(i, j))
                rhs = multiply(A, self({i: ONE}), {j: ONE})
                sgn = -ONE if (self.degree % 2 and deg[i] % 2) else ONE
                vec_axpy(rhs, sgn, multiply(A, {i: ONE}, self({j: ONE})))
                if lhs != rhs:
                    bad.append((i, j))
        return bad


def derivation_space(A, deg):
    """Q-basis of the degree-deg derivations of A.

    Solves the homogeneous Leibniz system over all basis pairs exactly.
    """
    labels = A.basis.labels
    d = A.basis.degree
    unknowns = [(s, t) for s in labels for t in labels
                if d[t] == d[s] + deg]
    idx = {u: n for n, u in enumerate(unknowns)}
    rows = []

    def row_for(i, j):
        # delta(i*j) - delta(i)*j - (-1)^(deg*|i|) i*delta(j) = 0,
        # coordinate by coordinate in the target basis
        coeff = {}  # (target label, unknown index) -> Q
        for m, c in A.prod_basis(i, j).items():
            for t in labels:
                if (m, t) in idx:
                    key = (t, idx[(m, t)])
                    coeff[key] = coeff.get(key, ZERO) + c
        for t in labels:
            if (i, t) in idx:
                for k, c in A.prod_basis(t, j).items():
                    key = (k, idx[(i, t)])
                    coeff[key] = coeff.get(key, ZERO) - c
        sgn = -ONE if (deg % 2 and d[i] % 2) else ONE
        for t in labels:
            if (j, t) in idx:
                for k, c in A.prod_basis(i, t).items():
                    key = (k, idx[(j, t)])
                    coeff[key] = coeff.get(key, ZERO) - sgn * c
        by_target = {}
        for (k, n), c in coeff.items():
            by_target.setdefault(k, {})[n] = c
        return by_target

    for i in labels:
        for j in labels:
            for k, cs in row_for(i, j).items():
                row = [ZERO] * len(unknowns)
                for n, c in cs.items():
                    row[n] = c
                rows.append(row)
    if not unknowns:
        return []
    if not rows:
        rows = [[ZERO] * len(unknowns)]
    _, kb = kernel_of_rows(rows, len(unknowns))
    out = []
    for v in kb:
        ent = {}
        for (s, t), n in idx.items():
            if v[n]:
                ent[(t, s)] = v[n]
        out.append(Derivation(A, deg, ent))
    return out


def graded_commutator(d1, d2):
    """[d1, d2] = d1 d2 - (-1)^(|d1||d2|) d2 d1, again a derivation."""
    if d1.of is not d2.of and d1.of.basis != d2.of.basis:
        raise ValueError("derivations over different algebras")
    sgn = -ONE if (d1.degree % 2 and d2.degree % 2) else ONE
    m = compose(d1.action, d2.action).add(
        compose(d2.action, d1.action).scale(-sgn))
    out = Derivation(d1.of, d1.degree + d2.degree, m)
    assert out.leibniz_violations() == []
    return out


# --- convenience constructors used by the catalog and the tests ---

def rational_algebra():
    """The ground field Q as a one-dimensional algebra."""
    b = GradedBasis([("1", 0)])
    return AlgebraSpec(b, "1", {("1", "1"): {"1": ONE}})


def exterior_algebra(gens):
    """Free graded commutative algebra on odd generators.

    gens: list of (label, odd degree).  Basis words are sorted label
    subsets, joined by '.'; the empty word is the unit "1".
    """
    gens = [(str(l), int(d)) for l, d in gens]
    for _, d in gens:
        if d % 2 == 0:
            raise ValueError("exterior generators must be odd")
    order = {l: n for n, (l, _) in enumerate(gens)}
    degree = dict(gens)
    words = [()]
    for l, _ in gens:
        words += [w + (l,) for w in words]

    def name(w):
        return ".".join(w) if w else "1"

    basis = GradedBasis([(name(w), sum(degree[l] for l in w)) for w in words])
    mult = {}
    for w1 in words:
        for w2 in words:
            if set(w1) & set(w2):
                mult[(name(w1), name(w2))] = {}
                continue
            merged = sorted(w1 + w2, key=order.get)
            # Koszul sign of sorting the concatenation (all gens odd)
            sign = 1
            cat = w1 + w2
            for i in range(len(cat)):
                for j in range(i + 1, len(cat)):
                    if order[cat[i]] > order[cat[j]]:
                        sign = -sign
            mult[(name(w1), name(w2))] = {name(tuple(merged)): Q(sign)}
    return AlgebraSpec(basis, "1", mult)


def truncated_polynomial(var, n, degree=0):
    """Q[var]/(var^n) with the generator in an even degree (default 0)."""
    if degree % 2:
        raise ValueError("truncated polynomial generator must be even")
    names = ["1"] + [var if k == 1 else "%s^%d" % (var, k)
                     for k in range(1, n)]
    basis = GradedBasis([(names[k], k * degree) for k in range(n)])
    mult = {}
    for i in range(n):
        for j in range(n):
            mult[(names[i], names[j])] = (
                {names[i + j]: ONE} if i + j < n else {})
    return AlgebraSpec(basis, "1", mult)
