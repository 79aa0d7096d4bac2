"""JSON instance files: parsing with validation, canonical emission.

One wire format describes an algebra, a free module over it, one
structure section and a truncation policy.  Rationals are written as
strings "p" or "p/q" in lowest terms with a positive denominator; floats
never appear.  Degrees in files use the upper convention: a file degree
q corresponds to the internal homological degree -q, so a differential
raises file degrees by one.

Document layout (all keys sorted on emission, two-space indent):

  algebra:   generators [{label, degree}], unit, mult [[a, b, c, "p/q"]]
             (a*b has coefficient p/q on c), diff [[target, source, "p/q"]]
  module:    generators [{label, degree}], diff [[target, source, "p/q"]]
             over induced labels "a|x"
  structure: tagged by "kind":
    lie_rinehart     bracket [[g1, g2, target, "p/q"]],
                     anchor [[g, target, source, "p/q"]]
    sh_lie_rinehart  coderivations {j: [[[word...], target, "p/q"]]},
                     twisting {j: [[[word...], target, source, "p/q"]]}
    quasi            bracketQ [[g1, g2, target, "p/q"]],
                     pairing [[g, target, source, "p/q"]],
                     triple [[x1, x2, target, source, "p/q"]]
    mdca             constants {j: {label: [[[word...], target, "p/q"]]}},
                     duals     {j: {label: [[[word...], target, "p/q"]]}}
  policy:    W, degree_window ([lo, hi] in file degrees, or null)

Emission is canonical (rows sorted, keys sorted), so parse followed by
emit reproduces a canonically emitted file byte for byte.
"""

import json
import re
from fractions import Fraction as Q

from .algebra import AlgebraSpec, validate_algebra
from .coalgebra import (Coderivation, ModuleSpec, TruncationPolicy,
                        word_degree)
from .forms import FormTable, TwistingCochain
from .graded import GradedBasis, LinearMap, ONE
from .structures import (LieRinehartData, MdcaStructure,
                         QuasiLieRinehartData, ShLieRinehartData)

_RATIONAL = re.compile(r"^-?(0|[1-9][0-9]*)(/[1-9][0-9]*)?$")

KINDS = ("lie_rinehart", "sh_lie_rinehart", "quasi", "mdca")


class InstanceError(ValueError):
    """Parse or validation failure, carrying the document locus."""

    def __init__(self, locus, message):
        self.locus = locus
        super().__init__("%s: %s" % (locus, message))


def q_to_str(c):
    c = Q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return "%d/%d" % (c.numerator, c.denominator)


def str_to_q(s, locus):
    if not isinstance(s, str) or not _RATIONAL.match(s):
        raise InstanceError(locus, "malformed rational %r (expected "
                            "\"p\" or \"p/q\" with q > 0)" % (s,))
    if "/" in s:
        p, q = s.split("/")
        val = Q(int(p), int(q))
        if val.denominator != int(q):
            raise InstanceError(locus, "rational %r is not in lowest "
                                "terms" % (s,))
        return val
    return Q(int(s))


# --------------------------------------------------------------- emission

def _gen_rows(basis):
    return [{"degree": -d, "label": l} for l, d in basis.gens]


def _map_rows(lin):
    return sorted([t, s, q_to_str(c)] for (t, s), c in lin.entries.items())


def _op_rows(prefix, op):
    return sorted(list(prefix) + [t, s, q_to_str(c)]
                  for (t, s), c in op.entries.items())


def _form_rows(f):
    return sorted([list(w), al, q_to_str(c)]
                  for w, vec in f.values.items() for al, c in vec.items())


def structure_doc(data):
    """The tagged structure section for a supported data object."""
    if isinstance(data, LieRinehartData):
        rows = sorted([g1, g2, tgt, q_to_str(c)]
                      for (g1, g2), vec in data.bracket.items()
                      for tgt, c in vec.items())
        anchor = sorted(r for (g,), op in data.anchor.maps.get(1, {}).items()
                        for r in _op_rows((g,), op))
        return {"anchor": anchor, "bracket": rows, "kind": "lie_rinehart"}
    if isinstance(data, ShLieRinehartData):
        cor = {str(j): sorted([list(w), tgt, q_to_str(c)]
                              for w, vec in tab.items()
                              for tgt, c in vec.items())
               for j, tab in data.partial.cor.items()}
        tw = {str(j): sorted([list(w), t_, s_, q_to_str(c)]
                             for w, op in tab.items()
                             for (t_, s_), c in op.entries.items())
              for j, tab in data.t.maps.items()}
        return {"coderivations": cor, "kind": "sh_lie_rinehart",
                "twisting": tw}
    if isinstance(data, QuasiLieRinehartData):
        rows = sorted([g1, g2, tgt, q_to_str(c)]
                      for (g1, g2), vec in data.bracket.items()
                      for tgt, c in vec.items())
        pairing = sorted(r for g, op in data.pairing.items()
                         for r in _op_rows((g,), op))
        triple = sorted(r for key, op in data.triple.items()
                        for r in _op_rows(key, op))
        return {"bracketQ": rows, "kind": "quasi", "pairing": pairing,
                "triple": triple}
    if isinstance(data, MdcaStructure):
        def tables(side):
            return {str(j): {name: _form_rows(f)
                             for name, f in tab.items()}
                    for j, tab in side.items()}
        return {"constants": tables(data.on_constants), "duals":
                tables(data.on_duals), "kind": "mdca"}
    raise TypeError("unsupported structure object %r" % (type(data),))


def emit_instance(data, policy=None):
    """Canonical JSON text for a structure object and policy."""
    L = data.L
    A = L.over
    policy = policy or TruncationPolicy(4)
    window = policy.degree_window
    doc = {
        "algebra": {
            "diff": _map_rows(A.diff),
            "generators": _gen_rows(A.basis),
            "mult": sorted([a, b, k, q_to_str(c)]
                           for (a, b), vec in A.mult.items()
                           for k, c in vec.items()),
            "unit": A.unit,
        },
        "module": {
            "diff": _map_rows(L.diff_l),
            "generators": _gen_rows(L.a_basis),
        },
        "policy": {
            "W": policy.W,
            "degree_window": (None if window is None
                              else [-window[1], -window[0]]),
        },
        "structure": structure_doc(data),
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- parsing

def _need(doc, key, locus, typ=dict):
    if not isinstance(doc, dict) or key not in doc:
        raise InstanceError(locus, "missing section %r" % (key,))
    val = doc[key]
    if typ is not None and not isinstance(val, typ):
        raise InstanceError("%s.%s" % (locus, key),
                            "expected %s" % typ.__name__)
    return val


def _parse_generators(rows, locus):
    if not isinstance(rows, list) or not rows:
        raise InstanceError(locus, "at least one generator required")
    gens = []
    seen = set()
    for n, row in enumerate(rows):
        here = "%s[%d]" % (locus, n)
        if (not isinstance(row, dict) or not isinstance(
                row.get("label"), str) or not isinstance(
                row.get("degree"), int)):
            raise InstanceError(here, "expected {label, degree}")
        if row["label"] in seen:
            raise InstanceError(here, "duplicate label %r" % row["label"])
        seen.add(row["label"])
        gens.append((row["label"], -row["degree"]))
    return gens


def _parse_map(rows, basis, degree, locus):
    entries = {}
    for n, row in enumerate(rows or []):
        here = "%s[%d]" % (locus, n)
        if not (isinstance(row, list) and len(row) == 3):
            raise InstanceError(here, "expected [target, source, rational]")
        t, s, c = row
        for lbl in (t, s):
            if lbl not in basis.degree:
                raise InstanceError(here, "unknown label %r" % (lbl,))
        key = (t, s)
        if key in entries:
            raise InstanceError(here, "duplicate entry %r" % (key,))
        if basis.degree[t] != basis.degree[s] + degree:
            raise InstanceError(here, "degree mismatch: %r -> %r is not "
                                "a degree %d entry" % (s, t, -degree))
        entries[key] = str_to_q(c, here)
    return LinearMap(basis, basis, degree, entries)


def _parse_algebra(doc):
    sec = _need(doc, "algebra", "instance")
    gens = _parse_generators(_need(sec, "generators", "algebra", list),
                             "algebra.generators")
    basis = GradedBasis(gens)
    unit = sec.get("unit")
    if not isinstance(unit, str):
        raise InstanceError("algebra", "unit required")
    if unit not in basis.degree:
        raise InstanceError("algebra.unit", "unknown label %r" % (unit,))
    mult = {}
    for n, row in enumerate(_need(sec, "mult", "algebra", list)):
        here = "algebra.mult[%d]" % n
        if not (isinstance(row, list) and len(row) == 4):
            raise InstanceError(here, "expected [a, b, c, rational]")
        a, b, k, c = row
        for lbl in (a, b, k):
            if lbl not in basis.degree:
                raise InstanceError(here, "unknown label %r" % (lbl,))
        vec = mult.setdefault((a, b), {})
        if k in vec:
            raise InstanceError(here, "duplicate product entry")
        vec[k] = str_to_q(c, here)
    diff = _parse_map(sec.get("diff", []), basis, -1, "algebra.diff")
    A = AlgebraSpec(basis, unit, mult, diff)
    bad = validate_algebra(A)
    if bad:
        raise InstanceError("algebra", "invariant %r fails at %r"
                            % (bad[0]["invariant"], bad[0]["witness"]))
    return A


def _parse_module(doc, A):
    sec = _need(doc, "module", "instance")
    gens = _parse_generators(_need(sec, "generators", "module", list),
                             "module.generators")
    L0 = ModuleSpec(A, GradedBasis(gens))
    diff = _parse_map(sec.get("diff", []), L0.l_basis, -1, "module.diff")
    L = ModuleSpec(A, GradedBasis(gens), diff)
    bad = L.validation_report()
    if bad:
        raise InstanceError("module", "invariant %r fails at %r"
                            % (bad[0]["invariant"], bad[0]["witness"]))
    return L


def _parse_vec_rows(rows, keylen, L, locus, word_keys=False):
    """Rows [key..., target, rational] grouped into {key: vector}."""
    out = {}
    for n, row in enumerate(rows or []):
        here = "%s[%d]" % (locus, n)
        if not (isinstance(row, list) and len(row) == keylen + 2):
            raise InstanceError(here, "expected %d fields" % (keylen + 2))
        key = row[:keylen]
        if word_keys:
            w = key[0]
            if not isinstance(w, list):
                raise InstanceError(here, "expected a word list")
            key = [tuple(w)]
            for lbl in w:
                if lbl not in L.l_basis.degree:
                    raise InstanceError(here, "unknown label %r" % (lbl,))
        tgt, c = row[keylen], row[keylen + 1]
        key = tuple(key) if keylen > 1 or word_keys else key[0]
        vec = out.setdefault(key, {})
        if tgt in vec:
            raise InstanceError(here, "duplicate entry for %r" % (tgt,))
        vec[tgt] = str_to_q(c, here)
    return out


def _parse_ops(rows, keylen, A, locus):
    """Rows [key..., target, source, rational] grouped into operators."""
    grouped = {}
    for n, row in enumerate(rows or []):
        here = "%s[%d]" % (locus, n)
        if not (isinstance(row, list) and len(row) == keylen + 3):
            raise InstanceError(here, "expected %d fields" % (keylen + 3))
        key = tuple(row[:keylen])
        t, s, c = row[keylen:]
        for lbl in (t, s):
            if lbl not in A.basis.degree:
                raise InstanceError(here, "unknown label %r" % (lbl,))
        ent = grouped.setdefault(key, {})
        if (t, s) in ent:
            raise InstanceError(here, "duplicate operator entry")
        ent[(t, s)] = str_to_q(c, here)
    ops = {}
    for key, ent in grouped.items():
        degs = {A.basis.degree[t] - A.basis.degree[s] for t, s in ent}
        if len(degs) != 1:
            raise InstanceError(locus, "operator at %r is not degree "
                                "homogeneous" % (key,))
        ops[key] = LinearMap(A.basis, A.basis, degs.pop(), ent)
    return ops


def _parse_structure(doc, L):
    sec = _need(doc, "structure", "instance")
    kind = sec.get("kind")
    if kind not in KINDS:
        raise InstanceError("structure", "unsupported kind %r (expected "
                            "one of %s)" % (kind, ", ".join(KINDS)))
    A = L.over
    try:
        if kind == "lie_rinehart":
            bracket = _parse_vec_rows(sec.get("bracket", []), 2, L,
                                      "structure.bracket")
            for (g1, g2), vec in bracket.items():
                for lbl in (g1, g2) + tuple(vec):
                    if lbl not in L.l_basis.degree:
                        raise InstanceError("structure.bracket",
                                            "unknown label %r" % (lbl,))
            anchor = _parse_ops(sec.get("anchor", []), 1, A,
                                "structure.anchor")
            return LieRinehartData(L, bracket,
                                   {g: op for (g,), op in anchor.items()})
        if kind == "sh_lie_rinehart":
            cor = {}
            for j, rows in _need(sec, "coderivations", "structure",
                                 dict).items():
                locus = "structure.coderivations[%s]" % j
                if not j.isdigit():
                    raise InstanceError(locus, "levels are integers")
                cor[int(j)] = _parse_vec_rows(rows, 1, L, locus,
                                              word_keys=True)
                cor[int(j)] = {k[0]: v for k, v in cor[int(j)].items()}
            maps = {}
            for j, rows in _need(sec, "twisting", "structure",
                                 dict).items():
                locus = "structure.twisting[%s]" % j
                if not j.isdigit():
                    raise InstanceError(locus, "levels are integers")
                ops = _parse_ops([[tuple(r[0])] + r[1:] for r in rows], 1,
                                 A, locus)
                maps[int(j)] = {w: op for (w,), op in ops.items()}
            return ShLieRinehartData(L, Coderivation(L, cor),
                                     TwistingCochain(L, maps))
        if kind == "quasi":
            bracket = _parse_vec_rows(sec.get("bracketQ", []), 2, L,
                                      "structure.bracketQ")
            pairing = _parse_ops(sec.get("pairing", []), 1, A,
                                 "structure.pairing")
            triple = _parse_ops(sec.get("triple", []), 2, A,
                                "structure.triple")
            return QuasiLieRinehartData(
                L, bracket, {g: op for (g,), op in pairing.items()},
                triple)
        # mdca
        def tables(key):
            side = {}
            for j, tabs in _need(sec, key, "structure", dict).items():
                locus = "structure.%s[%s]" % (key, j)
                if not j.isdigit():
                    raise InstanceError(locus, "levels are integers")
                side[int(j)] = {}
                for name, rows in tabs.items():
                    vals = _parse_vec_rows(rows, 1, L,
                                           "%s.%s" % (locus, name),
                                           word_keys=True)
                    vals = {k[0]: v for k, v in vals.items()}
                    degs = {L.over.basis.degree[al] - word_degree(L, w)
                            for w, vec in vals.items() for al in vec}
                    if len(degs) > 1:
                        raise InstanceError(
                            "%s.%s" % (locus, name),
                            "form is not degree homogeneous")
                    base = (L.over.basis.degree.get(name)
                            if key == "constants" else
                            -L.a_basis.degree.get(name, 0) - 1)
                    if base is None:
                        raise InstanceError(locus,
                                            "unknown generator %r" % name)
                    deg = (degs.pop() if degs else base - 1 - int(j))
                    side[int(j)][name] = FormTable(L, deg, vals)
            return side
        return MdcaStructure(L, tables("constants"), tables("duals"))
    except InstanceError:
        raise
    except ValueError as e:
        raise InstanceError("structure", str(e))


def _parse_policy(doc):
    sec = doc.get("policy") or {}
    if not isinstance(sec, dict):
        raise InstanceError("policy", "expected an object")
    W = sec.get("W", 4)
    if not isinstance(W, int) or W < 2:
        raise InstanceError("policy.W", "expected an integer >= 2")
    window = sec.get("degree_window")
    if window is not None:
        if not (isinstance(window, list) and len(window) == 2
                and all(isinstance(v, int) for v in window)
                and window[0] <= window[1]):
            raise InstanceError("policy.degree_window",
                                "expected [lo, hi] with lo <= hi")
        window = (-window[1], -window[0])
    return TruncationPolicy(W, window)


class ParsedInstance:
    def __init__(self, kind, data, policy):
        self.kind = kind
        self.data = data
        self.policy = policy
        self.L = data.L


def parse_instance_text(text, where="instance"):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(where, "malformed JSON: %s" % e)
    if not isinstance(doc, dict):
        raise InstanceError(where, "expected a JSON object")
    A = _parse_algebra(doc)
    L = _parse_module(doc, A)
    data = _parse_structure(doc, L)
    policy = _parse_policy(doc)
    kind = doc["structure"]["kind"]
    return ParsedInstance(kind, data, policy)


def parse_instance(path):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_instance_text(text, where=str(path))
