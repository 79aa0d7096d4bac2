"""Graded symmetric coalgebra on the suspension of a free dg module.

Words are canonically sorted multisets of suspension generators; the
shuffle diagonal, coderivation extensions and the bracket dictionary live
here.  All identities are checked up to a word-length truncation W.
"""

from fractions import Fraction as Q
from itertools import combinations, combinations_with_replacement, permutations

from .graded import (GradedBasis, LinearMap, ONE, ZERO, koszul_sign,
                     vec_axpy, vec_scale)
from .algebra import multiply

SEP = "|"  # joins an algebra label and a module generator label


class ModuleSpec:
    """Free dg A-module L of finite rank with its induced Q-basis.

    The Q-basis of L is indexed by pairs (A-basis element, module
    generator); the suspension sL reuses the same labels with degrees
    raised by one.
    """

    def __init__(self, over, a_basis, diff_l=None):
        self.over = over
        self.a_basis = a_basis
        gens = []
        for al, ad in over.basis.gens:
            for xl, xd in a_basis.gens:
                gens.append((al + SEP + xl, ad + xd))
        self.l_basis = GradedBasis(gens)
        self.sl_basis = GradedBasis([(l, d + 1) for l, d in gens])
        if diff_l is None:
            diff_l = LinearMap.zero(self.l_basis, self.l_basis, -1)
        self.diff_l = diff_l
        # The differential on the suspension, transported label-wise.
        # Because the module action on suspension labels is also the
        # label-wise transport (with no sign), the two suspension twists
        # cancel: the entries are those of the module differential.  Any
        # extra sign here would make the level-0 differential of forms
        # break module-multilinearity whenever the base algebra has a
        # nonzero differential.
        self.diff_sl = LinearMap(
            self.sl_basis, self.sl_basis, -1, dict(diff_l.entries))
        # per-instance caches for the word-combinatorics hot paths; safe
        # because the basis and the differential are fixed at construction
        self._norm_cache = {}
        self._split_cache = {}
        self._d0_cache = {}

    def split(self, label):
        a, x = label.rsplit(SEP, 1)
        return a, x

    def pair(self, a_label, x_label):
        return a_label + SEP + x_label

    def sl_degree(self, label):
        return self.sl_basis.degree[label]

    def word_sort_key(self, label):
        return (self.sl_basis.degree[label], label)

    def a_times_sl(self, a_vec, sl_vec):
        """A-module action on sL, through the structure constants."""
        out = {}
        for g, c in sl_vec.items():
            b, x = self.split(g)
            prod = multiply(self.over, a_vec, {b: ONE})
            for m, cm in prod.items():
                vec_axpy(out, c * cm, {self.pair(m, x): ONE})
        return out

    def validation_report(self):
        """dg-module axioms: d_L^2 = 0 and compatibility with d_A."""
        from .graded import compose
        rep = []
        if not compose(self.diff_l, self.diff_l).is_zero():
            rep.append({"invariant": "module differential squares to zero",
                        "witness": ()})
        A = self.over
        adeg = A.basis.degree
        for al in A.basis.labels:
            for g in self.l_basis.labels:
                b, x = self.split(g)
                lhs = self.diff_l.apply(
                    self.a_times_sl({al: ONE}, {g: ONE}))
                rhs = self.a_times_sl(A.diff.column(al), {g: ONE})
                sgn = -ONE if adeg[al] % 2 else ONE
                vec_axpy(rhs, sgn,
                         self.a_times_sl({al: ONE},
                                         self.diff_l.column(g)))
                if lhs != rhs:
                    rep.append({"invariant": "dg A-module compatibility",
                                "witness": (al, g)})
        return rep


class TruncationPolicy:
    def __init__(self, W=4, degree_window=None):
        if W < 2:
            raise ValueError("W must be at least 2")
        self.W = int(W)
        self.degree_window = degree_window


def normalize_word(L, gens):
    """Sort generators into canonical order, tracking the Koszul sign.

    Returns (sign, word tuple); the sign is 0 when a repeated odd
    generator forces the word to vanish.
    """
    key = tuple(gens)
    hit = L._norm_cache.get(key)
    if hit is not None:
        return hit
    for g in gens:
        if g not in L.sl_basis.degree:
            raise ValueError("unknown generator %r" % (g,))
    degs = [L.sl_basis.degree[g] for g in gens]
    out = None
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            if gens[i] == gens[j] and degs[i] % 2:
                out = (0, None)
    if out is None:
        perm = sorted(range(len(gens)),
                      key=lambda i: L.word_sort_key(gens[i]))
        sign = koszul_sign(perm, degs)
        out = (sign, tuple(gens[i] for i in perm))
    L._norm_cache[key] = out
    return out


def word_degree(L, word):
    return sum(L.sl_basis.degree[g] for g in word)


def word_basis(L, policy):
    """All canonical words of length <= W (and degree in the window, if
    one was given), deterministically ordered by (length, degree, word)."""
    gens = sorted(L.sl_basis.labels, key=L.word_sort_key)
    out = []
    for p in range(policy.W + 1):
        words = []
        for combo in combinations_with_replacement(gens, p):
            sgn, w = normalize_word(L, list(combo))
            if sgn == 0:
                continue
            d = word_degree(L, w)
            if policy.degree_window is not None:
                lo, hi = policy.degree_window
                if not (lo <= d <= hi):
                    continue
            words.append((d, w))
        out += [w for _, w in sorted(set(words))]
    return out


def splittings(L, word, left_size=None):
    """Shuffle diagonal terms of a word: (sign, left, right) triples.

    Enumerates position subsets, so repeated even generators pick up their
    multinomial multiplicities; both factors stay canonical.  With
    left_size given, only splittings with that left length are produced.
    """
    key = (word, left_size)
    hit = L._split_cache.get(key)
    if hit is not None:
        return hit
    n = len(word)
    degs = [L.sl_basis.degree[g] for g in word]
    sizes = range(n + 1) if left_size is None else [left_size]
    out = []
    for p in sizes:
        if p < 0 or p > n:
            continue
        for S in combinations(range(n), p):
            rest = [i for i in range(n) if i not in S]
            perm = list(S) + rest
            sgn = koszul_sign(perm, degs)
            out.append((sgn, tuple(word[i] for i in S),
                        tuple(word[i] for i in rest)))
    out = tuple(out)
    L._split_cache[key] = out
    return out


def shuffle_diagonal(L, word):
    """Delta(word) as {(left, right): coefficient}."""
    out = {}
    for sgn, w1, w2 in splittings(L, word):
        k = (w1, w2)
        out[k] = out.get(k, ZERO) + sgn
        if not out[k]:
            del out[k]
    return out


def apply_corestriction(L, cor, arity, word):
    """Extend a corestriction Sigma^arity[sL] -> sL to one word.

    Output is {word: coefficient}: pick every arity-subset, apply the
    corestriction, multiply the value back into the remaining factors and
    renormalize.
    """
    out = {}
    for sgn, w1, w2 in splittings(L, word, left_size=arity):
        val = cor.get(w1)
        if not val:
            continue
        for g, c in val.items():
            s2, w = normalize_word(L, [g] + list(w2))
            if s2 == 0:
                continue
            k = w
            out[k] = out.get(k, ZERO) + sgn * s2 * c
            if not out[k]:
                del out[k]
    return out


def apply_d0(L, word):
    """Coderivation extension of the suspended module differential."""
    hit = L._d0_cache.get(word)
    if hit is not None:
        return dict(hit)
    out = {}
    for sgn, w1, w2 in splittings(L, word, left_size=1):
        for g, c in L.diff_sl.column(w1[0]).items():
            s2, w = normalize_word(L, [g] + list(w2))
            if s2 == 0:
                continue
            out[w] = out.get(w, ZERO) + sgn * s2 * c
            if not out[w]:
                del out[w]
    L._d0_cache[word] = out
    return dict(out)


class Coderivation:
    """Filtered degree -1 coderivation via its corestrictions.

    cor[j] maps canonical words of length j+1 to sL elements; the level-j
    part lowers word length by j.  The j = 0 part always comes from the
    module differential and is not stored here.
    """

    def __init__(self, L, cor):
        self.L = L
        self.cor = {}
        for j, table in cor.items():
            j = int(j)
            if j < 1:
                raise ValueError("corestriction levels start at 1")
            clean = {}
            for w, vec in table.items():
                if len(w) != j + 1:
                    raise ValueError("level %d corestriction on a word "
                                     "of length %d" % (j, len(w)))
                vd = word_degree(L, w)
                v = {}
                for g, c in vec.items():
                    c = Q(c)
                    if not c:
                        continue
                    if L.sl_basis.degree[g] != vd - 1:
                        raise ValueError(
                            "corestriction not of degree -1 at %r" % (w,))
                    v[g] = c
                if v:
                    clean[w] = v
            if clean:
                self.cor[j] = clean
        # the corestriction tables are fixed after construction, so the
        # action on any one word can be cached
        self._apply_cache = {}

    def levels(self):
        return sorted(self.cor)

    def apply_level(self, j, word):
        if j == 0:
            return apply_d0(self.L, word)
        key = (j, word)
        hit = self._apply_cache.get(key)
        if hit is None:
            hit = apply_corestriction(self.L, self.cor.get(j, {}),
                                      j + 1, word)
            self._apply_cache[key] = hit
        return dict(hit)

    def apply_level_vec(self, j, wvec):
        out = {}
        for w, c in wvec.items():
            vec_axpy(out, c, self.apply_level(j, w))
        return out


def check_coalgebra_perturbation(partial, L, policy):
    """Level-by-level residuals of the filtered perturbation identities.

    For each level j the operator d0 @ del^j + del^j @ d0 +
    sum_k del^k @ del^(j-k) is evaluated on every basis word of length
    up to W; nonzero values are reported with their witnesses.
    """
    report = []
    words = word_basis(L, TruncationPolicy(policy.W))
    for j in range(1, policy.W):
        for w in words:
            res = partial.apply_level_vec(j, apply_d0(L, w))
            vec_axpy(res, ONE, apply_d0_vec(L, partial.apply_level(j, w)))
            for k in range(1, j):
                vec_axpy(res, ONE,
                         partial.apply_level_vec(k,
                                                 partial.apply_level(j - k, w)))
            if res:
                report.append({"level": j, "word": w, "value": res})
    return report


def apply_d0_vec(L, wvec):
    out = {}
    for w, c in wvec.items():
        vec_axpy(out, c, apply_d0(L, w))
    return out


def suspension_sign(degs):
    """Koszul sign of s tensor ... tensor s applied to homogeneous
    elements with the given (unsuspended) degrees."""
    n = len(degs)
    e = sum((n - 1 - i) * degs[i] for i in range(n))
    return -1 if e % 2 else 1


def brackets_from_coderivation(partial, n):
    """The n-ary bracket on the Q-basis of L encoded by the coderivation.

    Returns {basis label tuple: L-element}; tuples run over all ordered
    n-tuples with nonzero bracket.  The value is the desuspension of the
    symmetrized coderivation corestriction, including the 1/n! factor.
    """
    L = partial.L
    out = {}
    labels = L.l_basis.labels
    fact = Q(1)
    for i in range(2, n + 1):
        fact *= i
    for tup in combinations_with_replacement(sorted(labels), n):
        for args in set(permutations(tup)):
            degs = [L.l_basis.degree[g] for g in args]
            ssgn = suspension_sign(degs)
            acc = {}
            sdegs = [d + 1 for d in degs]
            for perm in permutations(range(n)):
                psgn = koszul_sign(list(perm), sdegs)
                nsgn, w = normalize_word(L, [args[i] for i in perm])
                if nsgn == 0:
                    continue
                val = partial.cor.get(n - 1, {}).get(w)
                if not val:
                    continue
                vec_axpy(acc, Q(psgn * nsgn * ssgn) / fact, val)
            if acc:
                out[args] = acc
    return out


def coderivation_from_brackets(L, brackets):
    """Coderivation whose corestrictions encode the given brackets.

    brackets: {n: {tuple of L basis labels: L-element}}, each table given
    at least on canonically ordered tuples.
    """
    cor = {}
    for n, table in brackets.items():
        n = int(n)
        level = {}
        for args, val in table.items():
            nsgn, w = normalize_word(L, list(args))
            if nsgn == 0:
                continue
            degs = [L.l_basis.degree[g] for g in args]
            ssgn = suspension_sign(degs)
            vec = vec_scale(Q(ssgn * nsgn), val)
            if w in level and level[w] != vec:
                raise ValueError("bracket table not graded symmetric "
                                 "at %r" % (args,))
            if vec:
                level[w] = vec
        if level:
            cor[n - 1] = level
    return Coderivation(L, cor)
