"""Command-line front end.

Subcommands orchestrate jet construction, both coefficient routes, the
identity suites, and the projective-line model checks.  JSON is the machine
format (`--table` renders aligned text); output is deterministic byte for
byte for fixed inputs: keys are sorted and rationals printed canonically.

Exit codes: 0 success, 2 usage error, 3 validation or self-test failure,
4 cross-check mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys

from .closed_form import b1_formula
from .errors import BergmanError
from .exterior import ExteriorAlgebra
from .geometry import (
    GeometryJet,
    fs_product_potential,
    flat_potential,
    identity_suite,
    jet_from_potential,
    parse_potential,
    random_potential,
    validate_jet,
)
from .models import (
    cp1_product_trace,
    cp1_sections_kernel,
    fit_expansion,
    rrh_coefficients,
)
from .oscillator import OscillatorContext
from .perturbation import b1_engine, build_O1, compute_F2_terms, engine_context
from .scalars import ExactScalar, rat

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_MISMATCH = 4


def _emit(payload: dict, table: bool = False) -> None:
    if table:
        for line in _tabulate(payload):
            print(line)
    else:
        print(json.dumps(payload, sort_keys=True, indent=2, default=str))


def _tabulate(payload: dict, prefix: str = "") -> list[str]:
    lines = []
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, dict):
            lines.append(f"{prefix}{key}:")
            lines.extend(_tabulate(value, prefix + "  "))
        elif isinstance(value, list):
            lines.append(f"{prefix}{key}: {json.dumps(value, sort_keys=True, default=str)}")
        else:
            lines.append(f"{prefix}{key}: {value}")
    return lines


def _load_jet(path: str) -> GeometryJet:
    with open(path) as fh:
        return GeometryJet.from_json(json.load(fh))


def _scalar_str(x: ExactScalar) -> str:
    return str(x)


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def cmd_jet_build(args) -> int:
    with open(args.potential) as fh:
        phi_l = parse_potential(json.load(fh), args.n)
    phi_e = None
    if args.potential_e:
        with open(args.potential_e) as fh:
            phi_e = parse_potential(json.load(fh), args.n)
    jet = jet_from_potential(phi_l, phi_e, n=args.n, q=args.q, rk_e=args.rk_e)
    report = validate_jet(jet)
    if not report.ok:
        _emit(report.to_json())
        return EXIT_VALIDATION
    with open(args.out, "w") as fh:
        json.dump(jet.to_json(), fh, sort_keys=True, indent=1)
    print(f"wrote jet {jet.jet_id} to {args.out}")
    return EXIT_OK


def cmd_jet_random(args) -> int:
    if args.flat:
        phi = flat_potential(args.n, args.q)
    elif args.fs:
        phi = fs_product_potential(args.n, args.q)
    else:
        phi = random_potential(args.n, args.q, args.seed)
    jet = jet_from_potential(phi, n=args.n, q=args.q, rk_e=args.rk_e)
    with open(args.out, "w") as fh:
        json.dump(jet.to_json(), fh, sort_keys=True, indent=1)
    print(f"wrote jet {jet.jet_id} to {args.out}")
    return EXIT_OK


def cmd_b1_closed_form(args) -> int:
    jet = _load_jet(args.jet)
    report = validate_jet(jet)
    if not report.ok:
        _emit(report.to_json())
        return EXIT_VALIDATION
    res = b1_formula(jet, check=False)
    payload = res.to_json()
    payload["trace_pretty"] = _scalar_str(res.trace)
    _emit(payload, table=args.table)
    return EXIT_OK


def cmd_b1_engine(args) -> int:
    jet = _load_jet(args.jet)
    report = validate_jet(jet)
    if not report.ok:
        _emit(report.to_json())
        return EXIT_VALIDATION
    ctx = engine_context(jet)
    terms: dict = {}
    if args.terms:
        named = compute_F2_terms(jet, ctx, check=False)
        terms = {name: endo.to_json() for name, endo in named.items()}
    res = b1_engine(jet, ctx, check=False)
    payload = res.to_json()
    payload["trace_pretty"] = _scalar_str(res.trace)
    if terms:
        payload["terms"] = terms
    _emit(payload, table=args.table)
    return EXIT_OK


def cmd_b1_crosscheck(args) -> int:
    jet = _load_jet(args.jet)
    report = validate_jet(jet)
    if not report.ok:
        _emit(report.to_json())
        return EXIT_VALIDATION
    closed = b1_formula(jet, check=False)
    engine = b1_engine(jet, check=False)
    if closed.endo == engine.endo:
        _emit({"jet_id": jet.jet_id, "match": True,
               "trace": _scalar_str(closed.trace)})
        return EXIT_OK
    diff = closed.endo - engine.endo
    _emit({
        "jet_id": jet.jet_id,
        "match": False,
        "closed_form_trace": _scalar_str(closed.trace),
        "engine_trace": _scalar_str(engine.trace),
        "difference": {f"{r},{c}": _scalar_str(v)
                       for (r, c), v in sorted(diff.entries.items())},
    })
    return EXIT_MISMATCH


def cmd_identities(args) -> int:
    jet = _load_jet(args.jet)
    validation = validate_jet(jet)
    identities = identity_suite(jet)
    _emit({"validation": validation.to_json(), "identities": identities.to_json()})
    return EXIT_OK if (validation.ok and identities.ok) else EXIT_VALIDATION


def cmd_model_cp1(args) -> int:
    if args.pmin < 2 or args.pmax < args.pmin:
        print("need 2 <= pmin <= pmax", file=sys.stderr)
        return EXIT_USAGE
    rows = [{"p": p, "trace": cp1_product_trace(p, args.n, args.q)}
            for p in range(args.pmin, args.pmax + 1)]
    coeffs = None
    if args.fit:
        coeffs = fit_expansion([(r["p"], r["trace"]) for r in rows], degree=args.n)
    if args.csv:
        print("p,trace")
        for r in rows:
            print(f"{r['p']},{r['trace']}")
        if coeffs is not None:
            print("fit," + ";".join(str(c) for c in coeffs))
        return EXIT_OK
    payload: dict = {"n": args.n, "q": args.q, "samples": rows}
    if coeffs is not None:
        payload["fit"] = [str(c) for c in coeffs]
    _emit(payload, table=args.table)
    return EXIT_OK


def cmd_model_cp1_sections(args) -> int:
    rep = cp1_sections_kernel(args.p, count=args.points)
    rep["samples"] = len(rep["samples"])  # keep the report small
    _emit(rep)
    return EXIT_OK


def cmd_rrh(args) -> int:
    res = rrh_coefficients(args.n, args.q, args.rk_e)
    _emit({"n": args.n, "q": args.q, "rk_e": args.rk_e,
           "pn": str(res["pn"]), "pn1": str(res["pn1"])})
    return EXIT_OK


def cmd_selftest(_args) -> int:
    checks: list[tuple[str, bool]] = []

    def record(name: str, ok: bool):
        checks.append((name, ok))

    # curvature Clifford action equals the degree operator shift
    n, q = 2, 1
    alg = ExteriorAlgebra(n)

    def model_curv(t):
        a, b = t
        def val(x, y):
            if x < n and y == x + n:
                return ExactScalar.pi(1, -2 if x < q else 2)
            return None
        v = val(a, b)
        if v is None:
            w = val(b, a)
            v = -w if w is not None else ExactScalar.zero()
        return v

    lhs = alg.clifford_of_form(2, model_curv)
    rhs = alg.omega_d(q).scale(rat(-2)) - alg.scalar_endo(ExactScalar.pi(1, 2 * n))
    record("clifford-curvature-action", lhs == rhs)

    ctx = OscillatorContext(2, 1)
    vac = ctx.vacuum()
    record("creation-annihilates-vacuum", vac.apply_bdag(0).is_zero())
    got = vac.apply_b(0).to_poly().terms
    want_keys = {((0, 0), (1, 0), (0, 0), (0, 0)), ((0, 0), (0, 0), (0, 0), (1, 0))}
    record("annihilator-on-vacuum", set(got) == want_keys)

    s = vac.apply_b(0).mul_xi(0).project_N0perp().resolvent_L0().evaluate_origin()
    record("resolved-gradient-constant",
           s == ctx.alg.identity().scale(ExactScalar.pi(-1, "-1/2")))
    s = vac.mul_xibar(0).mul_xi(0).project_N0perp().resolvent_L0().evaluate_origin()
    record("resolved-hessian-constant",
           s == ctx.alg.identity().scale(ExactScalar.pi(-2, "-1/4")))

    E0 = ctx.alg.wedge(2) @ ctx.alg.contract(1) @ ctx.alg.project_det(1)
    v = ctx.kernel_projector().apply_endo(E0).apply_b(0).mul_xi(0) \
        .resolvent_L20().evaluate_origin()
    record("sector-resolved-gradient", v == E0.scale(ExactScalar.pi(-1, "1/12")))
    v = ctx.kernel_projector().apply_endo(E0).mul_xibar(0).mul_xi(0) \
        .resolvent_L20().evaluate_origin()
    record("sector-resolved-hessian", v == E0.scale(ExactScalar.pi(-2, "1/24")))

    ctx4 = OscillatorContext(4, 2)
    E2 = (ctx4.alg.wedge(3) @ ctx4.alg.wedge(4) @ ctx4.alg.contract(1)
          @ ctx4.alg.contract(2) @ ctx4.alg.project_det(2))
    v = ctx4.kernel_projector().apply_endo(E2).mul_xibar(0).mul_xi(0) \
        .resolvent_L20().evaluate_origin()
    record("double-defect-resolved-hessian",
           v == E2.scale(ExactScalar.pi(-2, "1/80")))

    from .oscillator import _mode_moment
    record("gaussian-moment-primitive",
           _mode_moment(1, 1) == [(1, 1, rat(1)), (0, 0, ExactScalar.pi(-1))])

    jet = jet_from_potential(random_potential(2, 1, 7), n=2, q=1)
    ctx = engine_context(jet)
    o1 = build_O1(jet, ctx)
    ok = True
    for j in range(2):
        s = ctx.kernel_projector().mul_xi(j)
        if not o1(s).project_N().is_zero():
            ok = False
    record("first-order-kernel-block-vanishes",
           ok and o1(ctx.kernel_projector()).project_N().is_zero())

    all_ok = all(ok for _, ok in checks)
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"selftest: {sum(ok for _, ok in checks)}/{len(checks)} passed")
    return EXIT_OK if all_ok else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bergman",
        description="Exact evaluation of the subleading Bergman kernel coefficient")
    sub = ap.add_subparsers(dest="command", required=True)

    jet = sub.add_parser("jet", help="construct geometry jets")
    jet_sub = jet.add_subparsers(dest="jet_command", required=True)
    b = jet_sub.add_parser("build", help="build a jet from a potential file")
    b.add_argument("--potential", required=True)
    b.add_argument("--potential-e", default=None)
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--q", type=int, required=True)
    b.add_argument("--rk-e", type=int, default=1, dest="rk_e")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_jet_build)
    r = jet_sub.add_parser(
        "random",
        help="build a seeded random jet (standard-library Mersenne Twister)")
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--q", type=int, required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--rk-e", type=int, default=1, dest="rk_e")
    r.add_argument("--flat", action="store_true", help="emit the flat model jet")
    r.add_argument("--fs", action="store_true",
                   help="emit the projective-line product jet")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_jet_random)

    b1 = sub.add_parser("b1", help="evaluate the subleading coefficient")
    b1_sub = b1.add_subparsers(dest="b1_command", required=True)
    c = b1_sub.add_parser("closed-form")
    c.add_argument("--jet", required=True)
    c.add_argument("--json", action="store_true")
    c.add_argument("--table", action="store_true")
    c.set_defaults(func=cmd_b1_closed_form)
    e = b1_sub.add_parser("engine")
    e.add_argument("--jet", required=True)
    e.add_argument("--terms", action="store_true",
                   help="emit the per-term expansion breakdown")
    e.add_argument("--json", action="store_true")
    e.add_argument("--table", action="store_true")
    e.set_defaults(func=cmd_b1_engine)
    x = b1_sub.add_parser("crosscheck")
    x.add_argument("--jet", required=True)
    x.set_defaults(func=cmd_b1_crosscheck)

    idn = sub.add_parser("identities", help="run the exact identity suite on a jet")
    idn.add_argument("--jet", required=True)
    idn.set_defaults(func=cmd_identities)

    model = sub.add_parser("model", help="projective-line product checks")
    model_sub = model.add_subparsers(dest="model_command", required=True)
    mp = model_sub.add_parser("cp1-product")
    mp.add_argument("--n", type=int, required=True)
    mp.add_argument("--q", type=int, required=True)
    mp.add_argument("--pmin", type=int, required=True)
    mp.add_argument("--pmax", type=int, required=True)
    mp.add_argument("--fit", action="store_true")
    mp.add_argument("--table", action="store_true")
    mp.add_argument("--csv", action="store_true")
    mp.set_defaults(func=cmd_model_cp1)
    ms = model_sub.add_parser("cp1-sections")
    ms.add_argument("--p", type=int, required=True)
    ms.add_argument("--points", type=int, default=20)
    ms.set_defaults(func=cmd_model_cp1_sections)

    rrh = sub.add_parser("rrh", help="index-theorem consistency of the top coefficients")
    rrh.add_argument("--n", type=int, required=True)
    rrh.add_argument("--q", type=int, required=True)
    rrh.add_argument("--rk-e", type=int, default=1, dest="rk_e")
    rrh.set_defaults(func=cmd_rrh)

    st = sub.add_parser("selftest", help="run the pinned exact oracles")
    st.set_defaults(func=cmd_selftest)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except BergmanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
