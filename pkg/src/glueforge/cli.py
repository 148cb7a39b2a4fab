"""Command-line front end.

Every command reads JSON files, prints one JSON document (sorted keys) or a
flat text rendering, and exits 0 on success, 1 when the input is well formed
but fails a check, and 2 when it cannot be parsed.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from . import bundles, cohomology, cschtwo, finspace, gluing, sheafcore, sscomplex
from .errors import MalformedInput, ValidationError

OK, FAILED, MALFORMED = 0, 1, 2


class CheckFailed(Exception):
    """Raised by a command whose report says the input fails; carries the report."""

    def __init__(self, report: dict):
        super().__init__("check failed")
        self.report = report


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON in {path}: {exc.msg} (line {exc.lineno})") from None


def _names(text: str | None) -> list | None:
    if text is None:
        return None
    return [t for t in text.split(",") if t]


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise MalformedInput(f"degree window must look like lo:hi, got {text!r}") from None
    if lo > hi:
        raise MalformedInput("degree window is empty")
    return lo, hi


def _need(args, name: str):
    v = getattr(args, name)
    if v is None:
        raise MalformedInput(f"--{name.replace('_', '-')} is required")
    return v


def _graph(args):
    return sscomplex.graph_from_json(_load(_need(args, "graph")))


def _complex(args):
    G = _graph(args)
    if isinstance(G, sscomplex.DiGraph):
        return sscomplex.oriented_complex(G)
    return sscomplex.clique_complex(G, _names(args.order))


def _sheaf(args):
    return sheafcore.sheaf_from_json(_load(_need(args, "sheaf")))


def _open(P, text: str | None):
    names = _names(text)
    if names is None:
        return None
    for n in names:
        if n not in P.elements:
            raise MalformedInput(f"unknown point {n!r} in --open")
    return P.mask(names)


def _cover(P, args) -> list:
    raw = _load(_need(args, "cover"))
    if not isinstance(raw, list) or not all(isinstance(u, list) for u in raw):
        raise MalformedInput("cover must be a list of point lists")
    for i, U in enumerate(raw):
        for j, n in enumerate(U):
            if n not in P.elements:
                raise MalformedInput(f"unknown point {n!r}", f"$[{i}][{j}]")
    return [P.mask(U) for U in raw]


def _report(rep) -> dict:
    out = rep.to_json()
    if not out["ok"]:
        raise CheckFailed(out)
    return out


def _verdict(v: "cschtwo.Verdict", good: str) -> dict:
    out = v.to_json()
    if v.status != good:
        raise CheckFailed(out)
    return out


def _ring(value):
    return value.to_json() if hasattr(value, "to_json") else str(value)


# -- commands ---------------------------------------------------------------------

def cmd_clique(args) -> dict:
    X = _complex(args)
    return {"counts": list(X.counts), "regular": sscomplex.is_regular(X), "complex": X.to_json()}


def cmd_expand(args) -> dict:
    X = _complex(args)
    E = sscomplex.degenerate_expansion(X)
    return {"counts": list(E.counts), "base_counts": list(X.counts), "complex": E.to_json()}


def cmd_poset(args) -> dict:
    X = _complex(args)
    if args.expand:
        X = sscomplex.degenerate_expansion(X)
    return sscomplex.simplex_poset(X).to_json()


def cmd_alexandrov(args) -> dict:
    if args.poset is not None:
        P = finspace.poset_from_json(_load(args.poset))
    elif args.graph is not None:
        P = sscomplex.simplex_poset(_complex(args))
    else:
        raise MalformedInput("--poset or --graph is required")
    X = finspace.alexandrov(P)
    return {"points": list(X.points), "opens": sum(1 for _ in X.opens()), "T0": P.is_T0(),
            "minimal_opens": {p: X.subset(X.min_open(p)) for p in X.points}}


def cmd_sheaf_sections(args) -> dict:
    F = _sheaf(args)
    P = F.base
    U = _open(P, args.open)
    S = sheafcore.sections(F, finspace.alexandrov(P).full if U is None else U)
    if F.kind == sheafcore.RING:
        return {"kind": "ring", "sections": _ring(S)}
    return {"kind": "vect", "dim": S.dim, "over": list(S.mins), "basis": S.basis.to_json()}


def cmd_cohomology(args) -> dict:
    if args.p1_degree is not None:
        F = cohomology.p1_graded_sheaf(args.p1_degree, _window(args.degree_window))
    else:
        F = _sheaf(args)
        if isinstance(F, sheafcore.PoCosheaf):
            raise ValidationError("this is a cosheaf; use homology")
    C = cohomology.cochain_complex(F, _open(F.base, args.open))
    return {"H": cohomology.cohomology_dims(C), "chi": C.euler, "dims": list(C.dims)}


def cmd_homology(args) -> dict:
    G = _sheaf(args)
    if not isinstance(G, sheafcore.PoCosheaf):
        raise ValidationError("homology needs a cosheaf (give corestrictions)")
    C = cohomology.chain_complex(G, _open(G.base, args.closed))
    return {"H": cohomology.homology_dims(C), "chi": C.euler, "dims": list(C.dims)}


def _cech_data(args):
    if args.p1_degree is not None:
        return cohomology.p1_graded_cech(args.p1_degree, _window(args.degree_window))
    return cohomology.cech_from_json(_load(_need(args, "cech")))


def cmd_cech(args) -> dict:
    C = cohomology.cech_complex(_cech_data(args))
    return {"H": cohomology.cohomology_dims(C), "chi": C.euler, "dims": list(C.dims)}


def cmd_compare01(args) -> dict:
    if args.p1_degree is not None:
        cmp = cohomology.p1_comparison(args.p1_degree, _window(args.degree_window))
    else:
        F = _sheaf(args)
        if args.expect is not None:
            try:
                right = [int(x) for x in args.expect.split(",")]
            except ValueError:
                raise MalformedInput("--expect takes comma-separated integers") from None
        else:
            right = cohomology.cech_complex(cohomology.cech_from_json(_load(_need(args, "cech"))))
        cmp = cohomology.compare_01(F, right)
    out = cmp.to_json()
    if not cmp.agree_01:
        raise CheckFailed(out)
    return out


def cmd_glue(args) -> dict:
    S = _sheaf(args)
    P = S.base
    F = gluing.model_functor_of_cover(S, _cover(P, args))
    G = gluing.glue_finite(F)
    Q = G.sheaf.base
    same = set(Q.elements) == set(P.elements) and all(
        Q.le(p, q) == P.le(p, q) for p in P.elements for q in P.elements)
    return {"points": list(Q.elements), "covers": [list(c) for c in Q.covers()],
            "patches": {v: dict(m) for v, m in G.inclusions.items()}, "recovers_input": same}


def cmd_su(args) -> dict:
    S = _sheaf(args)
    M, pi = gluing.build_SU(S, _cover(S.base, args))
    return {"points": list(M.base.elements), "projection": dict(pi.mapping), "model": M.to_json()}


def _nerve(args):
    return gluing.nerve_from_json(_load(_need(args, "nerve")))


def cmd_su2(args) -> dict:
    su2 = gluing.build_SU2(_nerve(args))
    F = su2.sheaf
    return {"points": list(su2.points), "counts": list(su2.complex.counts),
            "paraschematic": su2.is_paraschematic(),
            "rings": {p: str(F.stalks[p]) for p in F.base.elements}}


def cmd_validate_datum(args) -> dict:
    return _report(gluing.validate_gluing_datum(gluing.datum_from_json(_load(_need(args, "datum")))))


def cmd_validate_functor(args) -> dict:
    return _report(gluing.check_gluing_functor(_nerve(args).functor()))


def cmd_bundle(args) -> dict:
    B = bundles.bundle_from_json(_load(_need(args, "bundle")))
    rep = bundles.validate_bundle(B)
    out = {"valid": rep.to_json()}
    if not rep.ok:
        raise CheckFailed(out)
    out["H"] = cohomology.sheaf_cohomology(bundles.bundle_to_sheaf(B))
    out["fixed_dim"] = bundles.fixed_space_dim(B)
    if args.walk is not None:
        out["monodromy"] = bundles.monodromy(B, _names(args.walk)).to_json()
    return out


def _scenario(args):
    return cschtwo.scenario_from_json(_load(_need(args, "scenario")))


def _morphism(S, name: str):
    if name not in S.morphisms:
        raise MalformedInput(f"unknown morphism {name!r}", "$.morphisms")
    return S.morphisms[name]


def cmd_cschtwo_build(args) -> dict:
    if args.nerve is not None:
        objs = {"nerve": cschtwo.object_from_cover(_nerve(args))}
    else:
        objs = _scenario(args).objects
    out, bad = {}, False
    for name, A in objs.items():
        rep = cschtwo.validate_object(A)
        out[name] = {**A.summary(), "valid": rep.to_json()}
        bad = bad or not rep.ok
    if bad:
        raise CheckFailed(out)
    return out


def cmd_cschtwo_we(args) -> dict:
    S = _scenario(args)
    names = args.morphism or sorted(S.morphisms)
    out = {n: cschtwo.is_weak_equivalence(_morphism(S, n)).to_json() for n in names}
    if any(v["status"] != cschtwo.TRUE for v in out.values()):
        raise CheckFailed(out)
    return out


def cmd_cschtwo_eq(args) -> dict:
    S = _scenario(args)
    if not args.morphism or len(args.morphism) != 2:
        raise MalformedInput("give exactly two --morphism names")
    a, b = (_morphism(S, n) for n in args.morphism)
    return _verdict(cschtwo.schematic_equal(a, b), cschtwo.EQUAL)


def cmd_counterexamples(args) -> dict:
    out = {}
    if args.which in ("rms3", "all"):
        r = cschtwo.rms3_counterexample()
        r["pass"] = (r["premise_strict"] and not r["strict_rms3_holds"]
                     and r["psi_schematic"] == cschtwo.EQUAL and r["pi_weak_equivalence"] == cschtwo.TRUE)
        out["rms3"] = r
    if args.which in ("witness", "all"):
        w = cschtwo.non_schematic_witness()
        w["pass"] = w["witness"]
        out["witness"] = w
    if not all(v["pass"] for v in out.values()):
        raise CheckFailed(out)
    return out


COMMANDS: dict[str, Callable] = {
    "clique": cmd_clique,
    "expand": cmd_expand,
    "poset": cmd_poset,
    "alexandrov": cmd_alexandrov,
    "sheaf-sections": cmd_sheaf_sections,
    "cohomology": cmd_cohomology,
    "homology": cmd_homology,
    "cech": cmd_cech,
    "compare01": cmd_compare01,
    "glue": cmd_glue,
    "su": cmd_su,
    "su2": cmd_su2,
    "validate-datum": cmd_validate_datum,
    "validate-functor": cmd_validate_functor,
    "bundle": cmd_bundle,
    "cschtwo-build": cmd_cschtwo_build,
    "cschtwo-we": cmd_cschtwo_we,
    "cschtwo-eq": cmd_cschtwo_eq,
    "counterexamples": cmd_counterexamples,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="glueforge", description="Finite models of glued schemes.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default="json")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    flags = {
        "clique": ["graph", "order"],
        "expand": ["graph", "order"],
        "poset": ["graph", "order", "expand"],
        "alexandrov": ["poset", "graph", "order"],
        "sheaf-sections": ["sheaf", "open"],
        "cohomology": ["sheaf", "open", "p1_degree", "degree_window"],
        "homology": ["sheaf", "closed"],
        "cech": ["cech", "p1_degree", "degree_window"],
        "compare01": ["sheaf", "cech", "expect", "p1_degree", "degree_window"],
        "glue": ["sheaf", "cover"],
        "su": ["sheaf", "cover"],
        "su2": ["nerve"],
        "validate-datum": ["datum"],
        "validate-functor": ["nerve"],
        "bundle": ["bundle", "walk"],
        "cschtwo-build": ["nerve", "scenario"],
        "cschtwo-we": ["scenario", "morphism"],
        "cschtwo-eq": ["scenario", "morphism"],
        "counterexamples": ["which"],
    }
    helps = {
        "graph": "graph JSON {vertices, edges, directed}",
        "order": "comma-separated vertex order",
        "expand": "use the degenerate expansion",
        "poset": "poset JSON {elements, covers}",
        "sheaf": "sheaf or cosheaf JSON",
        "open": "comma-separated points of an open set",
        "closed": "comma-separated points of a closed set",
        "p1_degree": "use O(d) on the projective line",
        "degree_window": "exponent window lo:hi",
        "cech": "Cech data JSON {index, spaces, maps}",
        "expect": "reference dimensions, e.g. 1,1",
        "cover": "JSON list of opens (point lists)",
        "nerve": "cover nerve JSON",
        "datum": "gluing datum JSON",
        "bundle": "graph bundle JSON",
        "walk": "closed vertex walk, e.g. a,b,c,a",
        "scenario": "C2_Sch scenario JSON",
        "morphism": "morphism name (repeatable)",
    }
    for name, fl in flags.items():
        sp = sub.add_parser(name, parents=[common])
        for f in fl:
            opt = "--" + f.replace("_", "-")
            if f == "which":
                sp.add_argument("which", nargs="?", choices=["rms3", "witness", "all"], default="all")
            elif f == "expand":
                sp.add_argument(opt, action="store_true", help=helps[f])
            elif f == "p1_degree":
                sp.add_argument(opt, type=int, help=helps[f])
            elif f == "morphism":
                sp.add_argument(opt, action="append", help=helps[f])
            else:
                sp.add_argument(opt, help=helps[f])
    return ap


def _text(obj, prefix: str = "") -> list[str]:
    if isinstance(obj, dict):
        lines = []
        for k in sorted(obj):
            lines += _text(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return lines
    return [f"{prefix}: {json.dumps(obj, sort_keys=True)}"]


def render(obj, fmt: str) -> str:
    if fmt == "text":
        return "\n".join(_text(obj)) + "\n"
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return MALFORMED if exc.code else OK
    code = OK
    try:
        out = COMMANDS[args.command](args)
    except CheckFailed as exc:
        out, code = exc.report, FAILED
    except MalformedInput as exc:
        out, code = {"error": "malformed-input", "path": exc.path, "detail": exc.reason}, MALFORMED
    except ValidationError as exc:
        out, code = {"error": "validation", "detail": str(exc)}, FAILED
        if isinstance(exc, cschtwo.OrientationConflict):
            out["simplices"] = list(exc.simplices)
    text = render(out, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
