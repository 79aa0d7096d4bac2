"""Structure verification and construction layer.

Ordinary and homotopy Lie-Rinehart data are checked axiom by axiom;
multi derivation Maurer-Cartan algebras are built from them and the
inverse extraction recovers brackets and anchors from such an algebra.
Quasi data (a base algebra in non-positive homological degrees with an
induced module, a pairing and a trilinear operation) are converted to the
homotopy format and verified the same way.
"""

from fractions import Fraction as Q

from .graded import (LinearMap, ONE, ZERO, compose, koszul_sign, vec_axpy,
                     vec_scale)
from .algebra import Derivation, multiply
from .coalgebra import (Coderivation, TruncationPolicy,
                        check_coalgebra_perturbation, normalize_word,
                        word_basis, word_degree)
from .forms import (FormTable, TwistingCochain, build_D, constant_form,
                    cup, descent_check, dual_one_forms, hom_differential,
                    is_A_multilinear,
                    partial_t, square_check, twisting_residual,
                    words_of_length)


def mult_op(A, a_vec):
    """Left multiplication by an element, as a linear map on A."""
    degs = {A.basis.degree[k] for k in a_vec}
    d = degs.pop() if degs else 0
    ent = {}
    for s in A.basis.labels:
        for k, c in multiply(A, a_vec, {s: ONE}).items():
            ent[(k, s)] = c
    return LinearMap(A.basis, A.basis, d, ent)


class LieRinehartData:
    """Ordinary (possibly graded) pair: module with bracket and anchor.

    bracket: full table {(label, label): module vector} on the induced
    basis of L; anchor: {label: operator on A} with the operator on a
    basis element of word degree w having degree w - 1.
    """

    def __init__(self, L, bracket, anchor):
        self.L = L
        self.bracket = {k: dict(v) for k, v in bracket.items()}
        self.anchor = TwistingCochain(
            L, {1: {(lbl,): op for lbl, op in anchor.items()
                    if not (isinstance(op, LinearMap) and op.is_zero())}})
        table = {k: v for k, v in self.bracket.items() if v}
        self.partial = coderivation_from_pair_table(L, table)

    def as_sh(self):
        return ShLieRinehartData(self.L, self.partial, self.anchor)


def coderivation_from_pair_table(L, table):
    from .coalgebra import coderivation_from_brackets
    return coderivation_from_brackets(L, {2: table}) if table else \
        Coderivation(L, {})


def bracket_eval(L, bracket, g1_vec, g2_vec):
    out = {}
    for g1, c1 in g1_vec.items():
        for g2, c2 in g2_vec.items():
            val = bracket.get((g1, g2))
            if val is None:
                rev = bracket.get((g2, g1))
                if rev is None:
                    continue
                d1 = L.l_basis.degree[g1]
                d2 = L.l_basis.degree[g2]
                s = -ONE if (d1 % 2 and d2 % 2) else ONE
                val = vec_scale(-s, rev)
            vec_axpy(out, c1 * c2, val)
    return out


def check_lie_rinehart(d, policy=None):
    """The four equivalent Lie-Rinehart conditions, checked exactly.

    Returns a report of violations: the bracket coderivation squares to
    zero against the module differential, the anchor is module-linear,
    the anchor residual vanishes, and the anchor-bracket compatibility
    law holds on every (basis element, algebra element, basis element).
    """
    if policy is None:
        policy = TruncationPolicy(3)
    L = d.L
    A = L.over
    report = []
    for r in check_coalgebra_perturbation(d.partial, L, policy):
        report.append({"axiom": "bracket coderivation squares to zero",
                       "witness": (r["level"], r["word"]),
                       "value": r["value"]})
    report += anchor_multilinearity_report(L, d.anchor)
    for r in check_twisting_cochain(L, d.anchor, d.partial, policy):
        report.append({"axiom": "anchor twisting identity",
                       "witness": (r["level"], r["word"]),
                       "value": r["value"]})
    report += anomaly_report(L, d.partial, d.anchor, 1)
    return report


def check_twisting_cochain(L, t, partial, policy):
    """Level-by-level residuals of the anchor family on every basis word
    up to the truncation; a genuine twisting cochain reports nothing."""
    report = []
    words = word_basis(L, TruncationPolicy(policy.W))
    for j in range(1, policy.W + 1):
        for w in words:
            res = twisting_residual(L, t, partial, j, w)
            if res:
                report.append({"level": j, "word": w, "value": res})
    return report


def anchor_multilinearity_report(L, t):
    """Each anchor level must satisfy the Koszul rule for scaling any
    slot by an algebra element (the family has degree -1)."""
    A = L.over
    adeg = A.basis.degree
    report = []
    for j in t.levels() or [1]:
        for w in words_of_length(L, j):
            for slot in range(j):
                prefix = -1 + sum(L.sl_degree(w[k]) for k in range(slot))
                for al in A.basis.labels:
                    scaled = L.a_times_sl({al: ONE}, {w[slot]: ONE})
                    lhs = LinearMap.zero(
                        A.basis, A.basis,
                        adeg[al] + word_degree(L, w) - 1)
                    for gl, c in scaled.items():
                        sgn, w2 = normalize_word(
                            L, list(w[:slot]) + [gl] + list(w[slot + 1:]))
                        if sgn == 0:
                            continue
                        op = t.value(j, w2)
                        if op is not None:
                            lhs = lhs.add(op.scale(Q(sgn) * c))
                    s = -ONE if (adeg[al] % 2 and prefix % 2) else ONE
                    op = t.value(j, w)
                    rhs = compose(mult_op(A, {al: ONE}), op).scale(s) \
                        if op is not None else lhs.zero(
                            A.basis, A.basis, lhs.degree)
                    if lhs != rhs:
                        report.append({
                            "axiom": "anchor module-linearity",
                            "witness": (j, w, slot, al)})
    return report


def anomaly_report(L, partial, t, j):
    """Scaling the last bracket slot by an algebra element produces the
    anchor term plus the Koszul-signed scaled bracket; violations on all
    (word, algebra element, generator) triples are reported."""
    A = L.over
    adeg = A.basis.degree
    report = []
    for w in words_of_length(L, j):
        op = t.value(j, w)
        # Koszul exponent of moving the scalar out of the last slot: its
        # degree times (degree -1 of the family plus the earlier slots)
        sl_sum = sum(L.sl_degree(gl) for gl in w)
        for al in A.basis.labels:
            for g2 in L.l_basis.labels:
                scaled = L.a_times_sl({al: ONE}, {g2: ONE})
                lhs = {}
                for gl, c in scaled.items():
                    vec_axpy(lhs, c,
                             apply_corestriction_args(
                                 L, partial, j, list(w) + [gl]))
                rhs = {}
                if op is not None:
                    for bl, c in op.apply({al: ONE}).items():
                        vec_axpy(rhs, c, sl_mult(L, bl, g2))
                s = -ONE if ((sl_sum + 1) % 2 and adeg[al] % 2) else ONE
                vec_axpy(rhs, s,
                         a_times_vec(L, al,
                                     apply_corestriction_args(
                                         L, partial, j, list(w) + [g2])))
                if lhs != rhs:
                    report.append({"axiom": "bracket anomaly law",
                                   "witness": (j, w, al, g2),
                                   "value": vec_sub_safe(lhs, rhs)})
    return report


def apply_corestriction_args(L, partial, j, args):
    sgn, w = normalize_word(L, args)
    if sgn == 0:
        return {}
    return vec_scale(Q(sgn), partial.cor.get(j, {}).get(w, {}))


def sl_mult(L, a_label, g_label):
    return L.a_times_sl({a_label: ONE}, {g_label: ONE})


def a_times_vec(L, a_label, vec):
    return L.a_times_sl({a_label: ONE}, vec)


def vec_sub_safe(u, v):
    out = dict(u)
    vec_axpy(out, -ONE, v)
    return out


class ShLieRinehartData:
    def __init__(self, L, partial, t):
        self.L = L
        self.partial = partial
        self.t = t


def check_sh_lie_rinehart(d, policy):
    """Both verification routes, cross-checked.

    Route one checks the axioms directly: coderivation perturbation
    identities, anchor twisting identities, anchor module-linearity and
    the anomaly law at every level.  Route two builds the differential
    operators on forms and runs the square and descent checks.  The two
    verdicts must agree; disagreement is itself reported.
    """
    L = d.L
    direct = []
    for r in check_coalgebra_perturbation(d.partial, L, policy):
        direct.append({"route": "direct", "axiom": "perturbation",
                       "witness": (r["level"], r["word"])})
    for r in check_twisting_cochain(L, d.t, d.partial, policy):
        direct.append({"route": "direct", "axiom": "twisting cochain",
                       "witness": (r["level"], r["word"])})
    for r in anchor_multilinearity_report(L, d.t):
        direct.append({"route": "direct", "axiom": r["axiom"],
                       "witness": r["witness"]})
    for j in sorted(set(d.partial.cor) | set(d.t.maps)):
        for r in anomaly_report(L, d.partial, d.t, j):
            direct.append({"route": "direct", "axiom": r["axiom"],
                           "witness": r["witness"]})
    indirect = []
    for r in square_check(L, d.partial, d.t, policy):
        indirect.append({"route": "operators", "axiom": "square",
                         "witness": (r["level"], r["form"], r["word"])})
    for j in range(policy.W):
        rep = descent_check(L, d.partial, d.t, j, policy)
        for r in rep["violations"]:
            indirect.append({"route": "operators", "axiom": "descent",
                             "witness": (j, r["form"], r["witness"])})
    agree = (not direct) == (not indirect)
    report = direct + indirect
    if not agree:
        report.append({"route": "cross-check",
                       "axiom": "route agreement",
                       "witness": (len(direct), len(indirect))})
    return report


class MdcaStructure:
    """Multi derivation Maurer-Cartan algebra, stored by the action of
    each level on the generators: constants and the dual 1-forms."""

    def __init__(self, L, on_constants, on_duals):
        self.L = L
        # on_constants[j][a_label] and on_duals[j][x_label] are FormTables
        self.on_constants = on_constants
        self.on_duals = on_duals

    def levels(self):
        return sorted(self.on_constants)


def build_maurer_cartan(d, policy):
    """Generator tables of the level differentials on multilinear forms.

    Refuses when some level fails to preserve module-multilinearity.
    """
    L = d.L
    on_constants = {}
    on_duals = {}
    duals = dual_one_forms(L)
    for j in range(policy.W):
        rep = descent_check(L, d.partial, d.t, j, policy)
        if rep["violations"]:
            raise ValueError("level %d does not preserve multilinearity: %r"
                             % (j, rep["violations"][0]))
        on_constants[j] = {}
        for al in L.over.basis.labels:
            on_constants[j][al] = build_D(
                constant_form(L, {al: ONE}), d.partial, d.t, j)
        on_duals[j] = {}
        for xl, form in duals.items():
            on_duals[j][xl] = build_D(form, d.partial, d.t, j)
    return MdcaStructure(L, on_constants, on_duals)


def extract_structure(m, policy):
    """Brackets and anchors from the generator tables of a multi
    derivation Maurer-Cartan algebra over a free module.

    The level-j anchor is the adjoint of the action on constants; the
    level-j bracket corestriction is recovered from the action on the
    dual 1-forms after subtracting the anchor operator, through the dual
    basis pairing.  Exact and total for a free module.
    """
    L = m.L
    A = L.over
    adeg = A.basis.degree
    t_maps = {}
    for j in m.levels():
        if j == 0:
            continue
        table = {}
        for w in words_of_length(L, j):
            wd = word_degree(L, w)
            ent = {}
            for al in A.basis.labels:
                form = m.on_constants[j].get(al)
                if form is None:
                    continue
                s = -ONE if (adeg[al] % 2 and wd % 2) else ONE
                for bl, c in form.value(w).items():
                    ent[(bl, al)] = s * c
            op = LinearMap(A.basis, A.basis, wd - 1, ent)
            if not op.is_zero():
                table[w] = op
        if table:
            t_maps[j] = table
    t = TwistingCochain(L, t_maps)
    duals = dual_one_forms(L)
    cor = {}
    for j in m.levels():
        if j == 0:
            continue
        level = {}
        for xl, eps in duals.items():
            phi = m.on_duals[j][xl].add(partial_t(eps, t, j).scale(-ONE))
            s = -ONE if (eps.degree + 1) % 2 else ONE
            for w, val in phi.values.items():
                if len(w) != j + 1:
                    continue
                vec = level.setdefault(w, {})
                for bl, c in val.items():
                    s2 = -ONE if (adeg[bl] % 2 and eps.degree % 2) else ONE
                    g = L.pair(bl, xl)
                    vec[g] = vec.get(g, ZERO) + s * s2 * c
        level = {w: {g: c for g, c in v.items() if c}
                 for w, v in level.items()}
        level = {w: v for w, v in level.items() if v}
        if level:
            cor[j] = level
    sh = ShLieRinehartData(L, Coderivation(L, cor), t)
    flags = []
    for j in m.levels():
        for al in A.basis.labels:
            rebuilt = build_D(constant_form(L, {al: ONE}),
                              sh.partial, sh.t, j)
            given = m.on_constants[j].get(al)
            if given is not None and rebuilt != given:
                flags.append({"flag": "constants table not reproduced",
                              "witness": (j, al)})
        for xl, eps in duals.items():
            rebuilt = build_D(eps, sh.partial, sh.t, j)
            given = m.on_duals[j].get(xl)
            if given is not None and rebuilt != given:
                flags.append({"flag": "dual table not reproduced",
                              "witness": (j, xl)})
    return sh, flags


def extend_anchor_level(L, base, j):
    """Operators given on bare generator tuples, extended to every
    canonical word by the Koszul scaling rule of a degree -1 family.

    base maps tuples of module generator names (sorted by suspended
    degree, then name) to operators on the base algebra.
    """
    A = L.over
    adeg = A.basis.degree
    table = {}
    for w in words_of_length(L, j):
        sign, coeff, key = strip_word(L, w, -1)
        if sign is None:
            continue
        op = base.get(key)
        if op is None or op.is_zero() or not coeff:
            continue
        full = compose(mult_op(A, coeff), op).scale(sign)
        if not full.is_zero():
            table[w] = full
    return table


def strip_word(L, w, start_degree):
    """Pull the algebra coefficients out of a word, left to right.

    Returns (sign, product of coefficients, sorted generator name tuple);
    sign is None when a repeated generator of odd suspended degree makes
    the stripped word vanish.
    """
    A = L.over
    adeg = A.basis.degree
    sign = ONE
    pre = start_degree
    a_parts, x_parts = [], []
    for g in w:
        b, x = L.split(g)
        if adeg[b] % 2 and pre % 2:
            sign = -sign
        a_parts.append(b)
        x_parts.append(x)
        pre += L.a_basis.degree[x] + 1
    n = len(w)
    sdegs = [L.a_basis.degree[x] + 1 for x in x_parts]
    for i in range(n):
        for k in range(i + 1, n):
            if x_parts[i] == x_parts[k] and sdegs[i] % 2:
                return None, None, None
    perm = sorted(range(n), key=lambda i: (sdegs[i], x_parts[i]))
    sign *= Q(koszul_sign(perm, sdegs))
    key = tuple(x_parts[i] for i in perm)
    coeff = {A.unit: ONE}
    for b in a_parts:
        coeff = multiply(A, coeff, {b: ONE})
    return sign, coeff, key


def extend_bracket_table(L, pairing, gen_bracket):
    """Full bracket table on the induced basis from generator brackets
    and the level-1 anchor, through the scaling anomaly and skewness.

    pairing: {generator name: operator on A}; gen_bracket: {(name, name):
    module element as an induced-basis vector}.
    """
    A = L.over
    adeg = A.basis.degree
    ldeg = L.l_basis.degree
    unit = A.unit
    memo = {}

    def bare_lookup(x1, x2):
        d1 = L.a_basis.degree[x1]
        d2 = L.a_basis.degree[x2]
        if (x1, x2) in gen_bracket:
            return dict(gen_bracket[(x1, x2)])
        if (x2, x1) in gen_bracket:
            s = ONE if (d1 % 2 and d2 % 2) else -ONE
            return vec_scale(s, gen_bracket[(x2, x1)])
        return {}

    def bra(g1, g2):
        key = (g1, g2)
        if key in memo:
            return memo[key]
        a1, x1 = L.split(g1)
        a2, x2 = L.split(g2)
        if a2 != unit:
            res = {}
            base_op = pairing.get(x1)
            # desuspending moves the anchor term across the first slot
            sl1 = -ONE if ldeg[g1] % 2 else ONE
            if a1 == unit and base_op is not None:
                for b, c in base_op.apply({a2: ONE}).items():
                    vec_axpy(res, sl1 * c, {L.pair(b, x2): ONE})
            elif base_op is not None:
                s1 = -ONE if adeg[a1] % 2 else ONE
                val = multiply(A, {a1: ONE}, base_op.apply({a2: ONE}))
                for b, c in val.items():
                    vec_axpy(res, sl1 * s1 * c, {L.pair(b, x2): ONE})
            s = -ONE if (ldeg[g1] % 2 and adeg[a2] % 2) else ONE
            rec = bra(g1, L.pair(unit, x2))
            vec_axpy(res, s, L.a_times_sl({a2: ONE}, rec))
        elif a1 != unit:
            s = ONE if (ldeg[g1] % 2 and ldeg[g2] % 2) else -ONE
            res = vec_scale(s, bra(g2, g1))
        else:
            res = bare_lookup(x1, x2)
        memo[key] = res
        return res

    table = {}
    for w in words_of_length(L, 2):
        v = bra(w[0], w[1])
        if v:
            table[w] = v
    return table


class QuasiLieRinehartData:
    """Base algebra in non-positive homological degrees, a module with
    all generators in degree zero, a bracket, a pairing and a trilinear
    defect operation.

    bracket: full table on pairs of induced basis labels; pairing maps
    induced basis labels to operators on the base algebra of matching
    degree; triple maps sorted pairs of generator names to base-linear
    degree +1 derivations.
    """

    def __init__(self, L, bracket, pairing, triple):
        self.L = L
        self.bracket = {k: dict(v) for k, v in bracket.items()}
        self.pairing = {g: op for g, op in pairing.items()
                        if op is not None and not op.is_zero()}
        self.triple = {k: op for k, op in triple.items()
                       if op is not None and not op.is_zero()}

    def validation_report(self):
        L = self.L
        A = L.over
        adeg = A.basis.degree
        ldeg = L.l_basis.degree
        rep = list(L.validation_report())
        for al, d in A.basis.gens:
            if d > 0:
                rep.append({"invariant": "base algebra in non-positive "
                            "degrees", "witness": al})
        for xl, d in L.a_basis.gens:
            if d != 0:
                rep.append({"invariant": "generators in degree zero",
                            "witness": xl})
        for g, op in self.pairing.items():
            if op.degree != ldeg[g]:
                rep.append({"invariant": "pairing degree", "witness": g})
            d = Derivation(A, op.degree, op)
            for pair in d.leibniz_violations():
                rep.append({"invariant": "pairing value is a derivation",
                            "witness": (g,) + pair})
        for key, op in self.triple.items():
            if tuple(sorted(key)) != key or key[0] == key[1]:
                rep.append({"invariant": "triple keyed by sorted distinct "
                            "generators", "witness": key})
            if op.degree != 1:
                rep.append({"invariant": "triple degree", "witness": key})
            d = Derivation(A, op.degree, op)
            for pair in d.leibniz_violations():
                rep.append({"invariant": "triple value is a derivation",
                            "witness": key + pair})
            for al in A.basis.labels_of_degree(0):
                if op.column(al):
                    rep.append({"invariant": "triple kills the degree "
                                "zero part", "witness": key + (al,)})
        for (g1, g2), v in self.bracket.items():
            target = ldeg[g1] + ldeg[g2]
            for g, c in v.items():
                if c and ldeg[g] != target:
                    rep.append({"invariant": "bracket degree",
                                "witness": (g1, g2, g)})
            rev = self.bracket.get((g2, g1))
            if rev is not None and (g2, g1) != (g1, g2):
                s = ONE if (ldeg[g1] % 2 and ldeg[g2] % 2) else -ONE
                if vec_sub_safe(v, vec_scale(s, rev)):
                    rep.append({"invariant": "bracket skewness",
                                "witness": (g1, g2)})
        return rep


def three_bracket_table(q, t2_table):
    """Level-two corestriction on suspended triples, built from the
    extended binary anchor by the scaling anomaly law: stripping an
    algebra coefficient off the last slot produces the anchor term plus
    the Koszul-signed scaled value, and laden slots commute to the last
    position with the graded-symmetric suspended sign.

    Returns (table on canonical words, evaluator on label triples).
    """
    L = q.L
    A = L.over
    adeg = A.basis.degree
    unit = A.unit
    memo = {}

    def sl(g):
        return L.sl_degree(g)

    def t2_val(g1, g2):
        sgn, w = normalize_word(L, [g1, g2])
        if sgn == 0:
            return None, 0
        return t2_table.get(w), sgn

    def cor3(g1, g2, g3):
        key = (g1, g2, g3)
        if key in memo:
            return memo[key]
        a3, x3 = L.split(g3)
        if a3 != unit:
            res = {}
            op, sgn = t2_val(g1, g2)
            if op is not None:
                for b, c in op.apply({a3: ONE}).items():
                    vec_axpy(res, Q(sgn) * c, {L.pair(b, x3): ONE})
            s = -ONE if ((sl(g1) + sl(g2) + 1) % 2
                         and adeg[a3] % 2) else ONE
            rec = cor3(g1, g2, L.pair(unit, x3))
            vec_axpy(res, s, L.a_times_sl({a3: ONE}, rec))
        elif L.split(g2)[0] != unit:
            s = -ONE if (sl(g2) % 2 and sl(g3) % 2) else ONE
            res = vec_scale(s, cor3(g1, g3, g2))
        elif L.split(g1)[0] != unit:
            s = -ONE if (sl(g1) % 2 and sl(g2) % 2) else ONE
            res = vec_scale(s, cor3(g2, g1, g3))
        else:
            res = {}
        memo[key] = res
        return res

    table = {}
    for w in words_of_length(L, 3):
        v = cor3(*w)
        if v:
            table[w] = v
    return table, cor3


def quasi_to_sh(q):
    """Homotopy data encoded by a quasi structure: the pairing becomes
    the unary anchor, the extended triple the binary anchor, the bracket
    the binary corestriction and the stripped triple the ternary one."""
    from .coalgebra import coderivation_from_brackets
    L = q.L
    t1 = {(g,): op for g, op in q.pairing.items()}
    t2 = extend_anchor_level(L, q.triple, 2)
    pair_table = {}
    for w in words_of_length(L, 2):
        v = bracket_eval(L, q.bracket, {w[0]: ONE}, {w[1]: ONE})
        if v:
            pair_table[w] = v
    triple_table, _ = three_bracket_table(q, t2)
    cor = {}
    if pair_table:
        cor.update(coderivation_from_brackets(L, {2: pair_table}).cor)
    if triple_table:
        # already a suspended-level corestriction table, installed as is
        cor[2] = triple_table
    partial = Coderivation(L, cor)
    maps = {}
    if t1:
        maps[1] = t1
    if t2:
        maps[2] = t2
    return ShLieRinehartData(L, partial, TwistingCochain(L, maps))


def alt_lookup(bare, names):
    """Value of an alternating table on an arbitrary name tuple."""
    lst = list(names)
    if len(set(lst)) != len(lst):
        return {}, 0
    perm = sorted(range(len(lst)), key=lambda i: lst[i])
    sgn = koszul_sign(perm, [1] * len(lst))
    return bare.get(tuple(lst[i] for i in perm), {}), sgn


def multilinear_form_from_bare(L, degree, bare):
    """The base-multilinear form with the given values on bare generator
    words, extended to all words by the Koszul scaling rule."""
    vals = {}
    lengths = sorted({len(k) for k in bare})
    for n in lengths:
        for w in words_of_length(L, n):
            sign, coeff, key = strip_word(L, w, degree)
            if sign is None:
                continue
            v = bare.get(key)
            if not v or not coeff:
                continue
            val = vec_scale(sign, multiply(L.over, coeff, v))
            if val:
                vals[w] = val
    return FormTable(L, degree, vals)


def bare_values_of_form(L, f):
    unit = L.over.unit
    out = {}
    for w, v in f.values.items():
        if all(L.split(g)[0] == unit for g in w):
            out[tuple(L.split(g)[1] for g in w)] = dict(v)
    return out


def quasi_alt_differential(q, j, degree, bare):
    """Level-one and level-two differentials on alternating tables,
    straight from the pairing, bracket and triple.

    The whole value carries the parity of the input form; inside the
    bracket sum the bracketed argument is fed back through the table.
    Returns the bare table of the image (a degree - 1 form).
    """
    from itertools import combinations
    L = q.L
    A = L.over
    unit = A.unit
    gens = sorted(x for x, _ in L.a_basis.gens)
    pref = -ONE if degree % 2 else ONE
    out = {}
    lengths = sorted({len(k) for k in bare}) or [0]
    for n in lengths:
        for args in combinations(gens, n + j):
            acc = {}
            if j == 1:
                for i in range(n + 1):
                    s = -ONE if i % 2 else ONE
                    rest = args[:i] + args[i + 1:]
                    op = q.pairing.get(L.pair(unit, args[i]))
                    v = bare.get(rest)
                    if op is not None and v:
                        vec_axpy(acc, s, op.apply(v))
                for i1 in range(n + 1):
                    for i2 in range(i1 + 1, n + 1):
                        s = -ONE if (i1 + i2) % 2 else ONE
                        rest = tuple(a for k, a in enumerate(args)
                                     if k not in (i1, i2))
                        inner = bracket_eval(
                            L, q.bracket,
                            {L.pair(unit, args[i1]): ONE},
                            {L.pair(unit, args[i2]): ONE})
                        for g, c in inner.items():
                            b, x = L.split(g)
                            v, asgn = alt_lookup(bare, (x,) + rest)
                            if v and asgn:
                                vec_axpy(acc, s * c * Q(asgn),
                                         multiply(A, {b: ONE}, v))
            elif j == 2:
                for i1 in range(n + 2):
                    for i2 in range(i1 + 1, n + 2):
                        s = -ONE if (i1 + i2) % 2 else ONE
                        rest = tuple(a for k, a in enumerate(args)
                                     if k not in (i1, i2))
                        op = q.triple.get((args[i1], args[i2]))
                        v = bare.get(rest)
                        if op is not None and v:
                            vec_axpy(acc, s, op.apply(v))
            if acc:
                out[args] = vec_scale(pref, acc)
    return out


def build_quasi_mc(q, policy):
    """Multi derivation Maurer-Cartan algebra of a quasi structure.

    The structure obtained through the homotopy conversion must agree,
    generator by generator, with the level differentials computed
    directly on the alternating-form model; disagreement raises."""
    sh = quasi_to_sh(q)
    m = build_maurer_cartan(sh, policy)
    L = q.L
    unit = L.over.unit
    gen_forms = []
    for al in L.over.basis.labels:
        gen_forms.append(("constants", al, L.over.basis.degree[al],
                          {(): {al: ONE}}))
    for xl, _ in L.a_basis.gens:
        gen_forms.append(("duals", xl, -1, {(xl,): {unit: ONE}}))
    for j in range(policy.W):
        for kind, name, degree, bare in gen_forms:
            built = (m.on_constants if kind == "constants"
                     else m.on_duals)[j][name]
            if j == 0:
                direct = hom_differential(
                    multilinear_form_from_bare(L, degree, bare))
            elif j <= 2:
                direct = multilinear_form_from_bare(
                    L, degree - 1, quasi_alt_differential(q, j, degree, bare))
            else:
                direct = FormTable(L, degree - 1, {})
            if built != direct:
                raise ValueError(
                    "representations disagree at level %d on %s %s"
                    % (j, kind, name))
    return m


def jacobi_defect_identity(q):
    """Cyclic bracket sums against the differentiated ternary bracket.

    Evaluates both sides on every triple of distinct generators (repeats
    make the suspended word vanish, so they carry no constraint) and
    reports the global sign making them equal (None when everything
    vanishes, or with the mismatch list when no sign works)."""
    from itertools import combinations
    L = q.L
    unit = L.over.unit
    t2 = extend_anchor_level(L, q.triple, 2)
    _, cor3 = three_bracket_table(q, t2)
    gens = sorted(x for x, _ in L.a_basis.gens)

    def bare(x):
        return {L.pair(unit, x): ONE}

    results = []
    for trip in combinations(gens, 3):
        x, y, z = trip
        lhs = {}
        for (u, v, w) in ((x, y, z), (y, z, x), (z, x, y)):
            inner = bracket_eval(L, q.bracket, bare(u), bare(v))
            vec_axpy(lhs, ONE, bracket_eval(L, q.bracket, inner, bare(w)))
        rhs = {}
        for slot in range(3):
            # the differential crosses the earlier (suspended) slots
            s = -ONE if sum(L.sl_degree(L.pair(unit, g))
                            for g in trip[:slot]) % 2 else ONE
            args = [bare(x), bare(y), bare(z)]
            args[slot] = L.diff_l.apply(args[slot])
            for g1, c1 in args[0].items():
                for g2, c2 in args[1].items():
                    for g3, c3 in args[2].items():
                        vec_axpy(rhs, s * c1 * c2 * c3,
                                 cor3(g1, g2, g3))
        results.append((trip, lhs, rhs))
    if all(not lhs and not rhs for _, lhs, rhs in results):
        return {"sign": None, "mismatches": []}
    for s in (ONE, -ONE):
        if all(not vec_sub_safe(lhs, vec_scale(s, rhs))
               for _, lhs, rhs in results):
            return {"sign": int(s), "mismatches": []}
    return {"sign": None,
            "mismatches": [{"triple": t, "lhs": lhs, "rhs": rhs}
                           for t, lhs, rhs in results
                           if vec_sub_safe(lhs, rhs)
                           or vec_sub_safe(lhs, vec_scale(-ONE, rhs))]}
