"""Command line driver.

Verbs:
  check      run the identity checks appropriate to the structure kind
  roundtrip  build the differential tables, extract the structure back,
             rebuild, and require exact agreement in both directions
  cohomology Betti numbers of the multilinear form complex in a window
  catalog    list the built-in examples or emit one as an instance file

Paths may name a file or a built-in example as catalog:<name>.  Exit
codes: 0 all identities hold, 1 some identity fails, 2 unusable input.
The MDCA_THREADS environment variable caps internal parallelism (the
current checks are single-threaded, so it is validated and ignored).
"""

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from .coalgebra import TruncationPolicy
from .forms import cohomology_ranks, square_check
from .instances import catalog_entry, catalog_names
from .io_json import (InstanceError, emit_instance, parse_instance,
                      parse_instance_text, q_to_str)
from .structures import (LieRinehartData, MdcaStructure,
                         QuasiLieRinehartData, ShLieRinehartData,
                         build_maurer_cartan, check_lie_rinehart,
                         check_sh_lie_rinehart, extract_structure,
                         quasi_to_sh)


class UsageError(Exception):
    pass


def jsonable(x):
    if isinstance(x, Fraction):
        return q_to_str(x)
    if isinstance(x, dict):
        return {jsonable_key(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return x


def jsonable_key(k):
    if isinstance(k, tuple):
        return ".".join(str(p) for p in k)
    return str(k)


def load(path, kind):
    if path.startswith("catalog:"):
        name = path[len("catalog:"):]
        try:
            data, policy = catalog_entry(name)
        except KeyError as e:
            raise UsageError(str(e.args[0]))
        inst = parse_instance_text(emit_instance(data, policy),
                                   where=path)
    else:
        if not os.path.exists(path):
            raise UsageError("no such file: %s" % path)
        inst = parse_instance(path)
    if kind != "auto":
        names = {"lr": "lie_rinehart", "shlr": "sh_lie_rinehart",
                 "quasi": "quasi", "mdca": "mdca"}
        if inst.kind != names[kind]:
            raise UsageError("instance is %s, not %s"
                             % (inst.kind, names[kind]))
    return inst


def policy_for(inst, args):
    W = args.W if args.W is not None else inst.policy.W
    window = inst.policy.degree_window
    if getattr(args, "window", None):
        try:
            lo, hi = args.window.split("..")
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise UsageError("--window expects a..b with integers")
        if lo > hi:
            raise UsageError("--window expects a..b with a <= b")
        # file/report degrees are upper: negate and swap for the
        # internal homological convention
        window = (-hi, -lo)
    return TruncationPolicy(W, window)


def as_homotopy(inst):
    """The homotopy form of any structure kind (module differential,
    coderivation, anchor family)."""
    data = inst.data
    if isinstance(data, LieRinehartData):
        return data.as_sh()
    if isinstance(data, ShLieRinehartData):
        return data
    if isinstance(data, QuasiLieRinehartData):
        return quasi_to_sh(data)
    sh, flags = extract_structure(data, inst.policy)
    if flags:
        raise UsageError("structure tables are inconsistent: %r"
                         % (flags[0],))
    return sh


def run_check(inst, policy):
    data = inst.data
    residuals = []
    if isinstance(data, LieRinehartData):
        residuals = check_lie_rinehart(data, policy)
    elif isinstance(data, ShLieRinehartData):
        residuals = check_sh_lie_rinehart(data, policy)
    elif isinstance(data, QuasiLieRinehartData):
        residuals = [{"axiom": "quasi validation", "witness": r}
                     for r in data.validation_report()]
        if not residuals:
            residuals = check_sh_lie_rinehart(quasi_to_sh(data), policy)
    else:
        sh, flags = extract_structure(data, policy)
        residuals = [{"axiom": "table consistency", "witness": r}
                     for r in flags]
        residuals += [{"axiom": "square",
                       "witness": (r["level"], r["form"], r["word"])}
                      for r in square_check(data.L, sh.partial, sh.t,
                                            policy)]
    return residuals


def tables_of(m):
    return ({j: {n: (f.degree, f.values) for n, f in tab.items()}
             for j, tab in m.on_constants.items()},
            {j: {n: (f.degree, f.values) for n, f in tab.items()}
             for j, tab in m.on_duals.items()})


def run_roundtrip(inst, policy):
    residuals = []
    if isinstance(inst.data, MdcaStructure):
        m = inst.data
        sh, flags = extract_structure(m, policy)
        residuals += [{"stage": "extract", "witness": r} for r in flags]
    else:
        sh = as_homotopy(inst)
        try:
            m = build_maurer_cartan(sh, policy)
        except ValueError as e:
            return [{"stage": "build", "witness": str(e)}]
        back, flags = extract_structure(m, policy)
        residuals += [{"stage": "extract", "witness": r} for r in flags]
        if back.partial.cor != sh.partial.cor:
            residuals.append({"stage": "extract",
                              "witness": "coderivation tables differ"})
        t_pairs = [({j: {w: op.entries for w, op in tab.items()}
                     for j, tab in s.t.maps.items()}) for s in (back, sh)]
        if t_pairs[0] != t_pairs[1]:
            residuals.append({"stage": "extract",
                              "witness": "anchor tables differ"})
        sh = back
    try:
        m2 = build_maurer_cartan(sh, policy)
    except ValueError as e:
        return residuals + [{"stage": "rebuild", "witness": str(e)}]
    if tables_of(m) != tables_of(m2):
        residuals.append({"stage": "rebuild",
                          "witness": "differential tables differ"})
    return residuals


def run_cohomology(inst, policy):
    sh = as_homotopy(inst)
    ranks = cohomology_ranks(sh.L, sh.partial, sh.t, policy)
    # report in file degrees (upper convention)
    return {str(-d): {"rank": r["rank"], "boundary_flag": r["flagged"]}
            for d, r in sorted(ranks.items(), reverse=True)}


def render(report, args):
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(jsonable(report), fh, sort_keys=True, indent=2)
            fh.write("\n")
    print("verdict: %s" % report["verdict"])
    print("certified up to word length %d" % report["W"])
    for key in ("residuals", "betti"):
        if key in report:
            print("%s:" % key)
            body = json.dumps(jsonable(report[key]), sort_keys=True,
                              indent=2)
            for line in body.splitlines():
                print("  " + line)
    print("elapsed: %.3fs" % report["timing_seconds"])


def main(argv=None):
    threads = os.environ.get("MDCA_THREADS")
    if threads is not None:
        try:
            if int(threads) < 1:
                raise ValueError
        except ValueError:
            print("MDCA_THREADS must be a positive integer",
                  file=sys.stderr)
            return 2

    p = argparse.ArgumentParser(prog="mdca", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("path")
        sp.add_argument("--W", type=int, default=None)
        sp.add_argument("--json", default=None)
        sp.add_argument("--kind", default="auto",
                        choices=["auto", "lr", "shlr", "quasi", "mdca"])

    common(sub.add_parser("check"))
    common(sub.add_parser("roundtrip"))
    sp = sub.add_parser("cohomology")
    common(sp)
    sp.add_argument("--window", default=None)
    sp = sub.add_parser("catalog")
    sp.add_argument("action", choices=["list", "emit"])
    sp.add_argument("name", nargs="?")

    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    try:
        if args.verb == "catalog":
            if args.action == "list":
                for name in catalog_names():
                    print(name)
                return 0
            if not args.name:
                raise UsageError("catalog emit requires a name")
            try:
                data, policy = catalog_entry(args.name)
            except KeyError as e:
                raise UsageError(str(e.args[0]))
            sys.stdout.write(emit_instance(data, policy))
            return 0

        inst = load(args.path, args.kind)
        policy = policy_for(inst, args)
        t0 = time.time()
        if args.verb == "check":
            residuals = run_check(inst, policy)
            report = {"verdict": "pass" if not residuals else "fail",
                      "kind": inst.kind, "W": policy.W,
                      "residuals": residuals,
                      "timing_seconds": time.time() - t0}
            render(report, args)
            return 0 if not residuals else 1
        if args.verb == "roundtrip":
            residuals = run_roundtrip(inst, policy)
            report = {"verdict": "pass" if not residuals else "fail",
                      "kind": inst.kind, "W": policy.W,
                      "residuals": residuals,
                      "timing_seconds": time.time() - t0}
            render(report, args)
            return 0 if not residuals else 1
        # cohomology
        try:
            betti = run_cohomology(inst, policy)
        except ValueError as e:
            report = {"verdict": "fail", "kind": inst.kind,
                      "W": policy.W, "residuals": [str(e)],
                      "timing_seconds": time.time() - t0}
            render(report, args)
            return 1
        report = {"verdict": "pass", "kind": inst.kind, "W": policy.W,
                  "betti": betti, "timing_seconds": time.time() - t0}
        render(report, args)
        return 0
    except (UsageError, InstanceError, NotImplementedError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
