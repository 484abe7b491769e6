"""Command line front end.

    frobdens predict  FILE
    frobdens estimate FILE
    frobdens verify   FILE
    frobdens group    FILE
    frobdens lemma    --d D --p P [--chi injective|G] [--level I]
    frobdens lprobe   FILE

Exit codes: 0 ok, 1 verification failed, 2 bad input, 3 not predictable,
4 internal invariant breach.
"""
from __future__ import annotations

import argparse
import json
import math
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, TextIO

import jsonschema

from . import density, estimator, groups
from .errors import BadInput, FrobDensError, HypothesisViolated, InvariantBreach, NotPredictable
from .fields import AbelianScenario, Scenario, SnScenario
from .groups import (
    CharacterFn,
    GroupMorphism,
    fiber_h_classes,
    point_mass_character,
    regular_character,
    trivial_character,
    unit_group,
)

log = logging.getLogger("frobdens")

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT, EXIT_NOT_PREDICTABLE, EXIT_INVARIANT = 0, 1, 2, 3, 4

_ELEMENT = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string"},
        {"type": "object", "required": ["residue"],
         "properties": {"residue": {"type": "integer"}, "modulus": {"type": "integer", "minimum": 1}},
         "additionalProperties": False},
        {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
    ]
}

_NUMBER = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["field"],
    "properties": {
        "field": {
            "oneOf": [
                {"type": "object", "required": ["type", "m"],
                 "properties": {"type": {"const": "abelian"},
                                "m": {"type": "integer", "minimum": 3},
                                "U": {"type": "array", "items": {"type": "integer"}},
                                "V": {"type": "array", "items": {"type": "integer"}}},
                 "additionalProperties": False},
                {"type": "object", "required": ["type", "poly"],
                 "properties": {"type": {"const": "sn"},
                                "poly": {"type": "array", "items": {"type": "integer"}, "minItems": 3},
                                "normal_subgroup": {"oneOf": [
                                    {"enum": ["trivial", "alternating", "full", "klein"]},
                                    {"type": "array"}]}},
                 "additionalProperties": False},
            ]
        },
        "set": {"$ref": "#/$defs/set"},
        "x": _ELEMENT,
        "psi": {
            "type": "object", "required": ["type"],
            "properties": {"type": {"enum": ["regular", "trivial", "point_mass", "values"]},
                           "at": _ELEMENT,
                           "values": {"type": "array", "items": _NUMBER}},
            "additionalProperties": False,
        },
        "schedule": {"type": "array", "minItems": 1,
                     "items": {"type": "array", "prefixItems": [{"type": "number"}, {"type": "integer"}],
                               "minItems": 2, "maxItems": 2}},
        "X": {"type": "integer", "minimum": 2},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "expected": _NUMBER,
        "base": {"type": "array", "items": _ELEMENT},
        "cor35": {"type": "object", "required": ["L", "M", "x", "sigma"],
                  "properties": {"L": {"type": "integer", "minimum": 3},
                                 "M": {"type": "integer", "minimum": 3},
                                 "x": {"type": "integer"}, "sigma": {"type": "integer"}},
                  "additionalProperties": False},
        "lprobe": {"type": "object", "required": ["s"],
                   "properties": {"s": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                                  "chi": {"oneOf": [{"const": "trivial"},
                                                    {"type": "object",
                                                     "additionalProperties": {
                                                         "type": "array", "items": {"type": "number"},
                                                         "minItems": 2, "maxItems": 2}}]}},
                   "additionalProperties": False},
        "description": {"type": "string"},
    },
    "additionalProperties": False,
    "$defs": {
        "set": {
            "type": "object", "required": ["type"],
            "properties": {
                "type": {"enum": ["all", "empty", "chebotarev", "fiber", "congruence",
                                  "union", "intersect", "complement", "minus_finite"]},
                "level": {"enum": ["L", "K"]},
                "elements": {"type": "array", "items": _ELEMENT},
                "modulus": {"type": "integer", "minimum": 1},
                "residues": {"type": "array", "items": {"type": "integer"}},
                "sets": {"type": "array", "items": {"$ref": "#/$defs/set"}},
                "set": {"$ref": "#/$defs/set"},
                "primes": {"type": "array", "items": {"type": "integer"}},
            },
            "additionalProperties": False,
        }
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


@dataclass
class ScenarioFile:
    doc: dict
    scenario: Scenario | None
    S: density.SetExpr
    x: Any
    psi: CharacterFn | None
    schedule: estimator.Schedule | None
    X: int
    tolerance: float
    expected: Fraction | None
    base: frozenset | None


def _fraction(v) -> Fraction:
    return Fraction(v) if not isinstance(v, float) else Fraction(v).limit_denominator(10**12)


def build_field(spec: dict) -> Scenario:
    if spec["type"] == "abelian":
        return AbelianScenario(spec["m"], spec.get("U", ()), spec.get("V", ()))
    return SnScenario(spec["poly"], spec.get("normal_subgroup", "trivial"))


def build_set(spec: dict, sc: Scenario) -> density.SetExpr:
    kind = spec["type"]

    def need(key):
        if key not in spec:
            raise BadInput(f"set of type {kind!r} needs {key!r}")
        return spec[key]

    if kind == "all":
        return density.AllPrimes()
    if kind == "empty":
        return density.NoPrimes()
    if kind == "chebotarev":
        level = spec.get("level", "L")
        parse = sc.element if level == "L" else sc.quotient_element
        return density.Chebotarev(level, frozenset(parse(e) for e in need("elements")))
    if kind == "fiber":
        return density.Fiber(frozenset(sc.element(e) for e in need("elements")))
    if kind == "congruence":
        return density.Congruence(int(need("modulus")), frozenset(int(r) for r in need("residues")))
    if kind == "union":
        return density.Union(tuple(build_set(s, sc) for s in need("sets")))
    if kind == "intersect":
        return density.Intersect(tuple(build_set(s, sc) for s in need("sets")))
    if kind == "complement":
        return density.Complement(build_set(need("set"), sc))
    return density.MinusFinite(build_set(need("set"), sc), frozenset(int(p) for p in need("primes")))


def build_psi(spec: dict, sc: Scenario) -> CharacterFn:
    Q = sc.Q
    kind = spec["type"]
    if kind == "regular":
        return regular_character(Q)
    if kind == "trivial":
        return trivial_character(Q)
    if kind == "point_mass":
        if "at" not in spec:
            raise BadInput("point_mass character needs 'at'")
        return point_mass_character(Q, sc.quotient_element(spec["at"]))
    return CharacterFn(Q, [_fraction(v) for v in spec.get("values", [])])


def load(doc: dict) -> ScenarioFile:
    """Validate a scenario document and resolve it against its field."""
    try:
        _VALIDATOR.validate(doc)
    except jsonschema.ValidationError as exc:
        raise BadInput(f"scenario file: {exc.message}") from None
    sc = build_field(doc["field"])
    S = build_set(doc.get("set", {"type": "all"}), sc)
    x = sc.quotient_element(doc["x"]) if "x" in doc else sc.Q.identity
    psi = build_psi(doc["psi"], sc) if "psi" in doc else None
    schedule = estimator.Schedule(tuple(tuple(p) for p in doc["schedule"])) if "schedule" in doc else None
    X = int(doc.get("X", 10**7))
    expected = _fraction(doc["expected"]) if "expected" in doc else None
    base = None
    if "base" in doc:
        base = sc.Q.generated_subgroup([sc.quotient_element(b) for b in doc["base"]])
    return ScenarioFile(doc, sc, S, x, psi, schedule, X, float(doc.get("tolerance", 0.02)), expected, base)


def load_path(path: str | Path) -> ScenarioFile:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read {path}: {exc}") from None
    return load(doc)


def _cyclotomic_projection(m: int, g: int) -> GroupMorphism:
    src = unit_group(m)
    tgt = unit_group(g) if g > 2 else groups.FiniteGroup([1], lambda a, b: 1, 1, "1", check=False)
    return GroupMorphism(src, tgt, lambda r: r % g if g > 2 else 1)


def cor35_value(spec: dict) -> Fraction:
    """Density for ``L = Q(zeta_L)``, ``M = Q(zeta_M)`` over ``Q``."""
    mL, mM = spec["L"], spec["M"]
    g = math.gcd(mL, mM)
    return density.cor35_chebotarev_pullback(
        _cyclotomic_projection(mL, g), _cyclotomic_projection(mM, g), spec["x"] % mL, spec["sigma"] % mM)


def predicted(sf: ScenarioFile) -> Fraction:
    if "cor35" in sf.doc:
        return cor35_value(sf.doc["cor35"])
    if sf.psi is not None:
        chi = density.characteristic_function(sf.scenario, sf.S)
        return density.psi_density_predict(sf.psi, dict(zip(chi.group.elements, chi.values)))
    return density.predict_density(sf.scenario, sf.S, sf.x)


def _expected(sf: ScenarioFile) -> Fraction:
    return sf.expected if sf.expected is not None else predicted(sf)


# ---------------------------------------------------------------------------
# Commands

TSV_HEADER = ("estimator", "s", "X", "numer", "denom", "value", "expected", "abs_err", "pass")


def _write_tsv(out: TextIO, sf: ScenarioFile, report: estimator.VerifyReport) -> None:
    out.write(f"# scenario: {sf.scenario.label}\n")
    out.write(f"# note: {estimator.SCHEDULE_NOTE}\n")
    out.write(f"# tolerance: counting {report.tolerance}, weighted {2 * report.tolerance}\n")
    out.write("\t".join(TSV_HEADER) + "\n")
    for row in report.rows():
        out.write("\t".join(str(c) for c in row) + "\n")


def _run_report(sf: ScenarioFile, threads: int, expected: Fraction) -> estimator.VerifyReport:
    return estimator.verify(sf.scenario, sf.S, sf.x, expected, sf.tolerance, sf.X,
                            schedule=sf.schedule, base=sf.base, threads=threads)


def cmd_predict(args, out: TextIO) -> int:
    sf = load_path(args.file)
    v = predicted(sf)
    out.write(f"{v.numerator}/{v.denominator}\n")
    return EXIT_OK


def cmd_estimate(args, out: TextIO) -> int:
    sf = load_path(args.file)
    try:
        expected = _expected(sf)
    except NotPredictable:
        expected = None
    report = _run_report(sf, args.threads, expected if expected is not None else Fraction(0))
    if expected is None:
        out.write("# expected: none (set is not predictable); expected/abs_err/pass columns are vacuous\n")
    _write_tsv(out, sf, report)
    return EXIT_OK


def cmd_verify(args, out: TextIO) -> int:
    sf = load_path(args.file)
    report = _run_report(sf, args.threads, _expected(sf))
    _write_tsv(out, sf, report)
    out.write(f"# verdict: {'PASS' if report.passed else 'FAIL'}\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_group(args, out: TextIO) -> int:
    sf = load_path(args.file)
    sc = sf.scenario
    G, Q, pi = sc.G, sc.Q, sc.pi
    out.write(f"# {sc.label}\n")
    out.write(f"order\tG={len(G)}\tH={len(sc.H)}\tQ={len(Q)}\n")
    out.write("class\tsize\trepresentative\tcentralizer\telement_order\n")
    for i, C in enumerate(sc.G_classes):
        y = min(C, key=G.index)
        out.write(f"{i}\t{len(C)}\t{y!r}\t{len(G.centralizer(y))}\t{G.element_order(y)}\n")
    out.write("fiber_x\tord_x\tclass_size\trepresentative\tdensity\tgamma\tbeta\n")
    for x in Q.elements:
        for C in fiber_h_classes(pi, x).classes:
            y = min(C, key=G.index)
            out.write(f"{x!r}\t{Q.element_order(x)}\t{len(C)}\t{y!r}\t"
                      f"{density.prop32_density(pi, x, C)}\t{density.gamma_constant(pi, y)}\t"
                      f"{density.beta_constant(pi, y)}\n")
    return EXIT_OK


def cmd_lemma(args, out: TextIO) -> int:
    d, p, level = args.d, args.p, args.level
    if args.chi == "injective":
        c = density.injective_chi_generator(d, p)
        if c is None:
            raise BadInput(f"no injective character Z/{d} -> F_{p}^x")
    else:
        c = int(args.chi)
    ord_chi = density.multiplicative_order(c, p)
    out.write(f"# d={d} p={p} chi_gen={c} ord_chi={ord_chi} level={level}\n")
    out.write("psi_exp\tord_psi\tverdict\n")
    ok = True
    for j in range(d):
        try:
            verdict = "true" if density.lemma_normteiler_verify(d, p, c, level, j) else "false"
        except HypothesisViolated:
            verdict = "not-covered"
        ok &= verdict != "false"
        out.write(f"{j}\t{density.character_order(j, d)}\t{verdict}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lprobe(args, out: TextIO) -> int:
    sf = load_path(args.file)
    sc = sf.scenario
    if not isinstance(sc, AbelianScenario) or len(sc.U) != 1:
        raise BadInput("lprobe needs an abelian field with trivial U (K = Q(zeta_m))")
    spec = sf.doc.get("lprobe")
    if spec is None:
        raise BadInput("scenario file has no 'lprobe' block")
    chi_spec = spec.get("chi", "trivial")
    if chi_spec == "trivial":
        def chi(r):
            return 1.0
    else:
        table = {int(k) % sc.m: complex(*v) for k, v in chi_spec.items()}

        def chi(r):
            if r not in table:
                raise BadInput(f"character has no value at {r}")
            return table[r]
    x_res = min(r for r in range(sc.m) if math.gcd(r, sc.m) == 1 and sc.quotient_element(r) == sf.x)
    rows = estimator.l_product_probe(sc.m, chi, x_res, spec["s"], sf.X, threads=args.threads)
    out.write(f"# K = Q(zeta_{sc.m}), x = {x_res} mod {sc.m}, X = {sf.X}\n")
    out.write("s\tlog_product_re\tlog_product_im\tmodel\tdifference_re\n")
    for r in rows:
        lp = complex(r.log_product)
        out.write(f"{r.s:.6f}\t{lp.real:.10f}\t{lp.imag:.10f}\t{r.model:.10f}\t{lp.real - r.model:.10f}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frobdens", description="Frobenius-element densities: predict, estimate, verify.")
    ap.add_argument("--threads", type=int, default=estimator.default_threads(),
                    help="worker threads for prime classification (default: all cores)")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized group spot-checks")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("predict", cmd_predict, "exact density as num/den"),
        ("estimate", cmd_estimate, "TSV convergence table"),
        ("verify", cmd_verify, "TSV plus exit code 0 (pass) or 1 (fail)"),
        ("group", cmd_group, "group report: classes, centralizers, fiber partitions"),
        ("lprobe", cmd_lprobe, "truncated Euler product against the model"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("file")
        p.set_defaults(func=fn)
    p = sub.add_parser("lemma", help="normal-closure check in the semidirect tower")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--chi", default="injective", help="'injective' or the image of 1 in F_p^x")
    p.add_argument("--level", type=int, default=1)
    p.set_defaults(func=cmd_lemma)
    return ap


def main(argv: list[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    groups.SPOT_CHECK_SEED = args.seed
    if args.threads < 1:
        log.error("--threads must be positive")
        return EXIT_BAD_INPUT
    try:
        return args.func(args, out)
    except NotPredictable as exc:
        log.error("not predictable: %s", exc)
        return EXIT_NOT_PREDICTABLE
    except InvariantBreach as exc:
        log.error("invariant breach: %s", exc)
        return EXIT_INVARIANT
    except FrobDensError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_BAD_INPUT


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
