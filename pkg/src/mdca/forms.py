"""Convolution algebra of A-valued forms on the symmetric coalgebra.

Forms are sparse tables word -> algebra element; the cup product, the
Hom-differential and the bracket/anchor operators all live here, together
with A-multilinearity tests, square and bigrading checks and windowed
cohomology ranks.
"""

from fractions import Fraction as Q
from itertools import combinations_with_replacement

from .graded import LinearMap, ONE, ZERO, row_echelon, vec_axpy, vec_scale
from .algebra import Derivation, multiply
from .coalgebra import (TruncationPolicy, apply_d0, normalize_word,
                        splittings, word_basis, word_degree)


class FormTable:
    """Homogeneous A-valued form on canonical words.

    values maps canonical words to algebra elements; a form of degree d
    sends a word of degree w to an element of degree d + w.  Words absent
    from the table carry the value zero.
    """

    def __init__(self, L, degree, values):
        self.L = L
        self.degree = int(degree)
        self.values = {}
        adeg = L.over.basis.degree
        for w, vec in values.items():
            sgn, cw = normalize_word(L, list(w))
            if sgn == 0:
                continue
            if cw != w:
                raise ValueError("form table keyed by a non-canonical "
                                 "word %r" % (w,))
            wd = word_degree(L, w)
            v = {}
            for a, c in vec.items():
                c = Q(c)
                if not c:
                    continue
                if adeg[a] != self.degree + wd:
                    raise ValueError("value of degree %d on a word of "
                                     "degree %d in a degree %d form"
                                     % (adeg[a], wd, self.degree))
                v[a] = c
            if v:
                self.values[w] = v

    def __eq__(self, other):
        return (isinstance(other, FormTable) and self.degree == other.degree
                and self.values == other.values)

    def is_zero(self):
        return not self.values

    def support_lengths(self):
        return sorted({len(w) for w in self.values})

    def value(self, word):
        return dict(self.values.get(word, {}))

    def eval(self, args):
        """Value on an arbitrary generator tuple, via canonical sorting."""
        sgn, w = normalize_word(self.L, list(args))
        if sgn == 0:
            return {}
        return vec_scale(Q(sgn), self.values.get(w, {}))

    def eval_vec(self, wvec):
        out = {}
        for w, c in wvec.items():
            vec_axpy(out, c, self.values.get(w, {}))
        return out

    def add(self, other):
        if self.degree != other.degree:
            raise ValueError("adding forms of different degrees")
        vals = {w: dict(v) for w, v in self.values.items()}
        for w, v in other.values.items():
            acc = vals.setdefault(w, {})
            vec_axpy(acc, ONE, v)
            if not acc:
                del vals[w]
        return FormTable(self.L, self.degree, vals)

    def scale(self, c):
        c = Q(c)
        return FormTable(self.L, self.degree,
                         {w: vec_scale(c, v) for w, v in self.values.items()})


class TwistingCochain:
    """Anchor family: for each level j a table from length-j canonical
    words to degree word-degree-minus-one operators on A.

    The family as a whole is a degree -1 element; each individual value is
    stored as a LinearMap on the algebra basis.
    """

    def __init__(self, L, maps):
        self.L = L
        self.maps = {}
        A = L.over
        for j, table in maps.items():
            j = int(j)
            if j < 1:
                raise ValueError("anchor levels start at 1")
            clean = {}
            for w, op in table.items():
                sgn, cw = normalize_word(L, list(w))
                if sgn == 0:
                    continue
                if cw != w or len(w) != j:
                    raise ValueError("level %d anchor keyed by %r" % (j, w))
                wd = word_degree(L, w)
                if not isinstance(op, LinearMap):
                    op = LinearMap(A.basis, A.basis, wd - 1, op)
                if op.degree != wd - 1:
                    raise ValueError("anchor value on %r has degree %d, "
                                     "expected %d" % (w, op.degree, wd - 1))
                if not op.is_zero():
                    clean[w] = op
            if clean:
                self.maps[j] = clean

    def levels(self):
        return sorted(self.maps)

    def value(self, j, word):
        return self.maps.get(j, {}).get(word)

    def apply(self, j, word, a_vec):
        op = self.value(j, word)
        if op is None:
            return {}
        return op.apply(a_vec)

    def validation_report(self):
        """Every anchor value must be a derivation of A."""
        rep = []
        for j, table in self.maps.items():
            for w, op in table.items():
                d = Derivation(self.L.over, op.degree, op)
                for pair in d.leibniz_violations():
                    rep.append({"invariant": "anchor value is a derivation",
                                "witness": (j, w) + pair})
        return rep


def words_of_length(L, n):
    cache = getattr(L, "_words_cache", None)
    if cache is None:
        cache = L._words_cache = {}
    hit = cache.get(n)
    if hit is not None:
        return hit
    gens = sorted(L.sl_basis.labels, key=L.word_sort_key)
    out = []
    for combo in combinations_with_replacement(gens, n):
        sgn, w = normalize_word(L, list(combo))
        if sgn:
            out.append(w)
    out = sorted(set(out))
    cache[n] = out
    return out


def constant_form(L, a_vec):
    """Length-0 form with the given homogeneous algebra value."""
    degs = {L.over.basis.degree[a] for a in a_vec if a_vec[a]}
    if len(degs) > 1:
        raise ValueError("constant form value must be homogeneous")
    d = degs.pop() if degs else 0
    return FormTable(L, d, {(): dict(a_vec)} if a_vec else {})


def dual_one_forms(L):
    """The A-multilinear 1-forms dual to the free module generators.

    For a generator x the form sends (b, x) to b, with the Koszul sign of
    moving b across the form, and kills the other generators.
    """
    out = {}
    A = L.over
    for xl, xd in L.a_basis.gens:
        fdeg = -xd - 1
        vals = {}
        for bl, bd in A.basis.gens:
            s = -ONE if (bd % 2 and fdeg % 2) else ONE
            vals[(L.pair(bl, xl),)] = {bl: s}
        out[xl] = FormTable(L, fdeg, vals)
    return out


def cup(f, g):
    """Convolution product: (f cup g)(w) sums f(w1) g(w2) over the shuffle
    diagonal with the Koszul sign of moving g past w1."""
    if f.L is not g.L and f.L.sl_basis != g.L.sl_basis:
        raise ValueError("forms over different modules")
    L = f.L
    A = L.over
    candidates = set()
    for w1 in f.values:
        for w2 in g.values:
            sgn, w = normalize_word(L, list(w1 + w2))
            if sgn:
                candidates.add(w)
    vals = {}
    for w in candidates:
        acc = {}
        for sgn, u1, u2 in splittings(L, w):
            v1 = f.values.get(u1)
            v2 = g.values.get(u2)
            if not v1 or not v2:
                continue
            s = -1 if (g.degree % 2 and word_degree(L, u1) % 2) else 1
            vec_axpy(acc, Q(sgn * s), multiply(A, v1, v2))
        if acc:
            vals[w] = acc
    return FormTable(L, f.degree + g.degree, vals)


def hom_differential(f):
    """D0(f) = d_A after f, plus (-1)^(|f|+1) f after the word
    differential."""
    L = f.L
    A = L.over
    sgn = ONE if (f.degree + 1) % 2 == 0 else -ONE
    # candidate words: the support itself (algebra-differential term) and
    # every word the suspended differential can map into the support
    candidates = set(f.values)
    rev = {}
    for (tg, sg), c in L.diff_sl.entries.items():
        if c:
            rev.setdefault(tg, []).append(sg)
    for u in f.values:
        for i, g in enumerate(u):
            for sg in rev.get(g, ()):
                s2, w = normalize_word(
                    L, list(u[:i]) + [sg] + list(u[i + 1:]))
                if s2:
                    candidates.add(w)
    vals = {}
    for w in candidates:
        acc = A.diff.apply(f.value(w))
        vec_axpy(acc, sgn, f.eval_vec(apply_d0(L, w)))
        if acc:
            vals[w] = acc
    return FormTable(L, f.degree - 1, vals)


def partial_bra(f, partial, j):
    """Bracket operator: (-1)^(|f|+1) f after the level-j coderivation."""
    L = f.L
    sgn = ONE if (f.degree + 1) % 2 == 0 else -ONE
    # candidate words: replace one slot of a support word by any
    # corestriction key whose value contains that slot's generator
    by_value_gen = {}
    for wc, vec in partial.cor.get(j, {}).items():
        for g, c in vec.items():
            if c:
                by_value_gen.setdefault(g, []).append(wc)
    candidates = set()
    for u in f.values:
        for i, g in enumerate(u):
            if i and u[i] == u[i - 1]:
                continue
            for wc in by_value_gen.get(g, ()):
                s2, w = normalize_word(
                    L, list(wc) + list(u[:i]) + list(u[i + 1:]))
                if s2:
                    candidates.add(w)
    vals = {}
    for w in candidates:
        acc = vec_scale(sgn, f.eval_vec(partial.apply_level(j, w)))
        if acc:
            vals[w] = acc
    return FormTable(L, f.degree - 1, vals)


def partial_t(f, t, j):
    """Anchor operator: apply the level-j anchor value on the left factor
    of every splitting to the form value on the right factor."""
    L = f.L
    level = t.maps.get(j, {})
    candidates = set()
    for u in f.values:
        for w1 in level:
            s2, w = normalize_word(L, list(w1) + list(u))
            if s2:
                candidates.add(w)
    vals = {}
    for w in candidates:
        acc = {}
        for sgn, w1, w2 in splittings(L, w, left_size=j):
            v = f.values.get(w2)
            if not v:
                continue
            s = -1 if (f.degree % 2 and word_degree(L, w1) % 2) else 1
            vec_axpy(acc, Q(sgn * s), t.apply(j, w1, v))
        if acc:
            vals[w] = acc
    return FormTable(L, f.degree - 1, vals)


def build_D(f, partial, t, j):
    """Level-j differential: the Hom-differential at level 0, bracket plus
    anchor operator at the higher levels."""
    if j == 0:
        return hom_differential(f)
    return partial_bra(f, partial, j).add(partial_t(f, t, j))


def is_A_multilinear(f):
    """True iff scaling any slot by an algebra element pulls out with the
    Koszul sign of moving it across the form and the earlier slots.

    Returns (verdict, witness); the witness names (word, slot, scalar).
    """
    L = f.L
    A = L.over
    adeg = A.basis.degree
    for n in f.support_lengths():
        if n == 0:
            continue
        for w in words_of_length(L, n):
            for slot in range(n):
                prefix = f.degree + sum(L.sl_degree(w[k]) for k in range(slot))
                for al in A.basis.labels:
                    scaled = L.a_times_sl({al: ONE}, {w[slot]: ONE})
                    lhs = {}
                    for gl, c in scaled.items():
                        args = list(w)
                        args[slot] = gl
                        vec_axpy(lhs, c, f.eval(args))
                    s = -ONE if (adeg[al] % 2 and prefix % 2) else ONE
                    rhs = vec_scale(s, multiply(A, {al: ONE}, f.value(w)))
                    if lhs != rhs:
                        return False, {"word": w, "slot": slot, "scalar": al}
                # the slot value must also be determined by the bare
                # generator: strip its scalar part and compare.  The bare
                # word may vanish in the coalgebra (repeated generators of
                # odd suspended degree), in which case the value here must
                # be zero -- scaling canonical words alone never sees this.
                a, x = L.split(w[slot])
                if a != A.unit:
                    bare = list(w)
                    bare[slot] = L.pair(A.unit, x)
                    s = -ONE if (adeg[a] % 2 and prefix % 2) else ONE
                    rhs = vec_scale(s, multiply(A, {a: ONE}, f.eval(bare)))
                    if f.value(w) != rhs:
                        return False, {"word": w, "slot": slot, "scalar": a}
    return True, None


def multilinear_generators(L, max_len):
    """A-multilinear generator forms: homogeneous constants and the dual
    1-forms, together with cup monomials of the latter up to max_len."""
    out = []
    for al in L.over.basis.labels:
        out.append(("const:" + al, constant_form(L, {al: ONE})))
    duals = dual_one_forms(L)
    names = sorted(duals)
    level = [((), None)]
    for _ in range(max_len):
        nxt = []
        for key, form in level:
            for xl in names:
                if key and xl < key[-1]:
                    continue
                g = duals[xl] if form is None else cup(form, duals[xl])
                if g.is_zero():
                    continue
                nxt.append((key + (xl,), g))
        for key, g in nxt:
            out.append(("dual:" + ".".join(key), g))
        level = nxt
    return out


def descent_check(L, partial, t, j, policy):
    """Does the level-j differential preserve A-multilinearity?

    Applies it to every multilinear generator form of word length at most
    W - j; violations of the sum are reported, and for j >= 1 the two
    summands are additionally probed individually (for genuine anchor
    data each one fails on its own while the sum descends).
    """
    max_len = max(policy.W - j, 0)
    violations = []
    bra_fails = []
    t_fails = []
    for name, f in multilinear_generators(L, max_len):
        ok, wit = is_A_multilinear(build_D(f, partial, t, j))
        if not ok:
            violations.append({"form": name, "witness": wit})
        if j >= 1:
            ok_b, wit_b = is_A_multilinear(partial_bra(f, partial, j))
            if not ok_b:
                bra_fails.append({"form": name, "witness": wit_b})
            ok_t, wit_t = is_A_multilinear(partial_t(f, t, j))
            if not ok_t:
                t_fails.append({"form": name, "witness": wit_t})
    return {"violations": violations,
            "bracket_summand_failures": bra_fails,
            "anchor_summand_failures": t_fails}


def ambient_basis_forms(L, policy):
    """Dual basis of the space of forms on words up to length W."""
    out = []
    adeg = L.over.basis.degree
    for w in word_basis(L, policy):
        wd = word_degree(L, w)
        for al in L.over.basis.labels:
            name = "delta:%s@%s" % (al, "*".join(w) if w else "1")
            out.append((name, FormTable(L, adeg[al] - wd, {w: {al: ONE}})))
    return out


def square_check(L, partial, t, policy):
    """Level-by-level residuals of D squared.

    For each level j the sum of D_k D_(j-k) over k = 0..j is applied to
    every ambient dual-basis form and every multilinear generator form;
    nonzero values within the word window are reported with witnesses.
    """
    report = []
    forms = ambient_basis_forms(L, policy)
    forms += multilinear_generators(L, policy.W)
    seen = set()
    for j in range(policy.W):
        for name, f in forms:
            res = None
            for k in range(j + 1):
                g = build_D(build_D(f, partial, t, j - k), partial, t, k)
                res = g if res is None else res.add(g)
            for w, v in res.values.items():
                if len(w) > policy.W:
                    continue
                key = (j, name, w)
                if key in seen:
                    continue
                seen.add(key)
                report.append({"level": j, "form": name, "word": w,
                               "value": v})
    return report


def bigrade_check(L, partial, t, policy):
    """Each level-j differential must raise word length by exactly j on
    every ambient dual-basis form (the complementary degree shift then
    follows from homogeneity)."""
    report = []
    for name, f in ambient_basis_forms(L, policy):
        p = f.support_lengths()[0] if f.support_lengths() else 0
        for j in range(policy.W):
            g = build_D(f, partial, t, j)
            for w in g.values:
                if len(w) != p + j:
                    report.append({"level": j, "form": name, "word": w,
                                   "expected_length": p + j})
    return report


def total_differential(f, partial, t, policy):
    out = None
    for j in range(policy.W):
        g = build_D(f, partial, t, j)
        out = g if out is None else out.add(g)
    return out


def multilinear_basis(L, policy):
    """Basis of the A-multilinear forms of word length up to W: algebra
    basis elements cup dual-generator monomials."""
    duals = dual_one_forms(L)
    names = sorted(duals)
    monos = [("", None)]
    level = [("", None)]
    for _ in range(policy.W):
        nxt = []
        last = {key: key.split(".")[-1] for key, _ in level if key}
        for key, form in level:
            for xl in names:
                if key and xl < last[key]:
                    continue
                g = duals[xl] if form is None else cup(form, duals[xl])
                if g.is_zero():
                    continue
                nxt.append((key + "." + xl if key else xl, g))
        monos += nxt
        level = nxt
    out = []
    for al in L.over.basis.labels:
        c = constant_form(L, {al: ONE})
        for key, form in monos:
            g = c if form is None else cup(c, form)
            if g.is_zero():
                continue
            out.append(("%s*%s" % (al, key or "1"), g))
    return out


def form_coordinates(f, coords):
    """Flatten a form to the (word, algebra label) coordinate list."""
    return [f.values.get(w, {}).get(al, ZERO) for w, al in coords]


def cohomology_ranks(L, partial, t, policy):
    """Betti numbers over Q of the A-multilinear form complex, within the
    word-length truncation and optional degree window.

    Refuses when the square check reports nonzero residuals; degrees at
    the window boundary are flagged as unreliable since differentials may
    enter or leave the window.
    """
    if square_check(L, partial, t, policy):
        raise ValueError("total differential does not square to zero "
                         "within the truncation window")
    basis = multilinear_basis(L, policy)
    by_degree = {}
    for name, f in basis:
        by_degree.setdefault(f.degree, []).append(f)
    degrees = sorted(by_degree)
    window = policy.degree_window
    if window is None and degrees:
        window = (degrees[0], degrees[-1])
    coords = [(w, al) for w in word_basis(L, TruncationPolicy(policy.W))
              for al in L.over.basis.labels]
    ranks = {}

    def differential_rank(d):
        # rank of the total differential out of degree d
        fs = by_degree.get(d, [])
        rows = []
        for f in fs:
            g = total_differential(f, partial, t, policy)
            rows.append(form_coordinates(g, coords))
        if not rows:
            return 0
        return len(row_echelon(rows, len(coords)))

    lo, hi = window if window is not None else (0, -1)
    for d in range(lo, hi + 1):
        dim = len(by_degree.get(d, []))
        betti = dim - differential_rank(d) - differential_rank(d + 1)
        # boundary degrees are unreliable: differentials may enter or
        # leave the window or the word-length truncation
        flagged = d in (lo, hi)
        ranks[d] = {"rank": betti, "flagged": flagged}
    return ranks


def twisting_residual(L, t, partial, j, word):
    """Level-j residual of the anchor family as an operator on A.

    The residual of a genuine twisting cochain vanishes: the commutator
    of the algebra differential with the level-j value, plus the value on
    the differentiated word, plus the values on the bracketed word, plus
    the composite of two lower anchor values over every splitting.
    """
    A = L.over
    wd = word_degree(L, word)
    out = {}

    def axpy_op(c, op_entries):
        for k, v in op_entries.items():
            out[k] = out.get(k, ZERO) + c * v
            if not out[k]:
                del out[k]

    op = t.value(j, word)
    if op is not None:
        from .graded import compose
        axpy_op(ONE, compose(A.diff, op).entries)
        s = -ONE if (wd - 1) % 2 else ONE
        axpy_op(-s, compose(op, A.diff).entries)
    for w2, c in apply_d0(L, word).items():
        op2 = t.value(j, w2)
        if op2 is not None:
            axpy_op(c, op2.entries)
    for k in range(1, j):
        for w2, c in partial.apply_level(j - k, word).items():
            op2 = t.value(k, w2)
            if op2 is not None:
                axpy_op(c, op2.entries)
    for k in range(1, j):
        for sgn, w1, w2 in splittings(L, word, left_size=k):
            op1 = t.value(k, w1)
            op2 = t.value(j - k, w2)
            if op1 is None or op2 is None:
                continue
            s = -1 if word_degree(L, w1) % 2 else 1
            from .graded import compose
            axpy_op(Q(sgn * s), compose(op1, op2).entries)
    return out
