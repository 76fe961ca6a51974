"""Independent re-derivation of the subleading coefficient by resolvent calculus.

From a geometry jet this module freezes the first- and second-order
perturbation operators of the rescaled square of the Dirac-type operator as
explicit composites of oscillator primitives, pushes the model kernel
through the six-term second-order resolvent expansion, and reads the
coefficient off at the origin.  Nothing here shares code with the closed
formula: agreement of the two routes is the package's flagship certificate.

Conventions used when dispatching frame sums to oscillator primitives
(xi-adapted frame, partner(a) = a + n mod 2n):

* sum_i T(e_i) Op(e_i)   ->  2 sum_a T(d_partner(a)) Op(d_a)
* nabla_0 along d/dxi_j is -b_j/2, along d/dxibar_j is +b_j^+/2,
* multiplication by the radial coordinate Z_a is mul_xi / mul_xibar,
* Clifford bilinears are assembled from exact factor pairs in the
  holomorphic frame, with v-frame components twice the coordinate ones.
"""

from __future__ import annotations

from typing import Callable

from .closed_form import B1Result
from .errors import InvalidJetError
from .exterior import ExteriorAlgebra, ExteriorEndo
from .geometry import GeometryJet, validate_jet
from .oscillator import OscillatorContext, TwoPointState
from .scalars import ExactScalar, rat

_ZERO = ExactScalar.zero()

Poly = dict[tuple[tuple[int, ...], tuple[int, ...]], ExactScalar]
Operator = Callable[[TwoPointState], TwoPointState]


# ---------------------------------------------------------------------------
# small polynomial helpers (coefficients of multiplication operators)
# ---------------------------------------------------------------------------


def _poly_zero() -> Poly:
    return {}


def _poly_add(p: Poly, key, c: ExactScalar) -> None:
    if key in p:
        p[key] = p[key] + c
    else:
        p[key] = c


def _poly_var(n: int, a: int) -> Poly:
    """The coordinate monomial Z_a as a polynomial in (xi, xibar)."""
    if a < n:
        key = (tuple(1 if i == a else 0 for i in range(n)), (0,) * n)
    else:
        key = ((0,) * n, tuple(1 if i == a - n else 0 for i in range(n)))
    return {key: rat(1)}


def _poly_mul(n: int, p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            key = (tuple(x + y for x, y in zip(a1, a2)),
                   tuple(x + y for x, y in zip(b1, b2)))
            _poly_add(out, key, c1 * c2)
    return out


def _poly_scale(p: Poly, c: ExactScalar) -> Poly:
    return {k: v * c for k, v in p.items()}


def _poly_accum(p: Poly, q: Poly) -> None:
    for k, c in q.items():
        _poly_add(p, k, c)


def _poly_diff(n: int, p: Poly, a: int) -> Poly:
    out: Poly = {}
    for (xe, be), c in p.items():
        if a < n:
            if xe[a]:
                key = (xe[:a] + (xe[a] - 1,) + xe[a + 1:], be)
                _poly_add(out, key, c.scale(xe[a]))
        else:
            j = a - n
            if be[j]:
                key = (xe, be[:j] + (be[j] - 1,) + be[j + 1:])
                _poly_add(out, key, c.scale(be[j]))
    return out


def _apply_poly(state: TwoPointState, p: Poly) -> TwoPointState:
    acc = TwoPointState(state.ctx, {})
    for (xe, be), c in p.items():
        if c.is_zero():
            continue
        s = state
        for j, k in enumerate(xe):
            for _ in range(k):
                s = s.mul_xi(j)
        for j, k in enumerate(be):
            for _ in range(k):
                s = s.mul_xibar(j)
        acc = acc + s.scale(c)
    return acc


def _apply_nabla0(state: TwoPointState, a: int) -> TwoPointState:
    n = state.ctx.n
    if a < n:
        return state.apply_b(a).scale(rat("-1/2"))
    return state.apply_bdag(a - n).scale(rat("1/2"))


# ---------------------------------------------------------------------------
# frame translations for the exterior sector
# ---------------------------------------------------------------------------


def _v_to_xi(n: int, q: int, label: int) -> int:
    """Map a holomorphic-frame label to the xi-frame coordinate label."""
    if label < n:
        return n + label if label < q else label
    j = label - n
    return j if j < q else n + j


def _quarter_cc(alg: ExteriorAlgebra, q: int, comp_xi) -> ExteriorEndo:
    """(1/4) <A e_i, e_j> c(e_i) c(e_j) from xi-frame components of A."""
    n = alg.n

    def comp_v(l: int, m: int) -> ExactScalar:
        return comp_xi(_v_to_xi(n, q, l), _v_to_xi(n, q, m)).scale(2)

    return alg.action_two_form(comp_v)


def _clifford_four_form(alg: ExteriorAlgebra, q: int, comp4_xi) -> ExteriorEndo:
    """Clifford contraction of a 4-form given by xi-frame components."""
    n = alg.n

    def comp_v(labels: tuple[int, ...]) -> ExactScalar:
        return comp4_xi(tuple(_v_to_xi(n, q, l) for l in labels)).scale(4)

    return alg.clifford_of_form(4, comp_v)


# ---------------------------------------------------------------------------
# the perturbation operators
# ---------------------------------------------------------------------------


def build_O1_prime(jet: GeometryJet, ctx: OscillatorContext) -> Operator:
    """The degree-one derivative coupling built from the curvature gradient.

    Written in creation/annihilation normal order: the creation side carries
    its quadratic coefficient on the left, the annihilation side on the
    right, which makes the vanishing of the kernel-to-kernel block manifest.
    """
    n = jet.n
    dim = 2 * n

    hplus: list[Poly] = []
    hminus: list[Poly] = []
    for j in range(n):
        pp: Poly = {}
        pm: Poly = {}
        for a in range(dim):
            for b in range(dim):
                cp = jet.dRL1[a][b][j]
                cm = jet.dRL1[a][b][n + j]
                if cp.is_zero() and cm.is_zero():
                    continue
                mono = _poly_mul(n, _poly_var(n, a), _poly_var(n, b))
                if not cp.is_zero():
                    _poly_accum(pp, _poly_scale(mono, cp))
                if not cm.is_zero():
                    _poly_accum(pm, _poly_scale(mono, cm))
        hplus.append(pp)
        hminus.append(pm)

    two_thirds = rat("2/3")

    def op(state: TwoPointState) -> TwoPointState:
        acc = TwoPointState(state.ctx, {})
        for j in range(n):
            if hplus[j]:
                acc = acc - _apply_poly(state.apply_bdag(j), hplus[j]).scale(two_thirds)
            if hminus[j]:
                acc = acc + _apply_poly(state, hminus[j]).apply_b(j).scale(two_thirds)
        return acc

    return op


def build_O1(jet: GeometryJet, ctx: OscillatorContext) -> Operator:
    """First-order operator: gradient-coupled creation/annihilation part plus
    the Clifford action of the transported structure derivative."""
    n = jet.n
    dim = 2 * n
    prime = build_O1_prime(jet, ctx)

    cliff: list[tuple[int, ExteriorEndo]] = []
    for a in range(dim):
        endo = _quarter_cc(ctx.alg, jet.q,
                           lambda b, c, a=a: jet.nablaBJ[a][b][c])
        endo = endo.scale(ExactScalar.rational(0, -4, 1))  # -4 pi i
        if not endo.is_zero():
            cliff.append((a, endo))

    def op(state: TwoPointState) -> TwoPointState:
        acc = prime(state)
        for a, endo in cliff:
            acc = acc + _apply_poly(state.apply_endo(endo), _poly_var(n, a))
        return acc

    return op


def build_O2_prime(jet: GeometryJet, ctx: OscillatorContext) -> Operator:
    """The scalar second-order piece: curvature-quadratic derivative terms,
    second curvature-derivative couplings, the gradient square, and the
    oscillator commutator correction."""
    n = jet.n
    dim = 2 * n
    alg = ctx.alg
    part = lambda a: (a + n) % dim

    # (1/3) <R(Z, e_i) Z, e_j> nabla_i nabla_j ; double frame resolution
    kpoly: dict[tuple[int, int], Poly] = {}
    for a in range(dim):
        for b in range(dim):
            p: Poly = {}
            for c in range(dim):
                for d in range(dim):
                    v = jet.RTX[c][part(a)][d][part(b)]
                    if not v.is_zero():
                        _poly_accum(p, _poly_scale(
                            _poly_mul(n, _poly_var(n, c), _poly_var(n, d)), v))
            if p:
                kpoly[(a, b)] = _poly_scale(p, rat("4/3"))

    # single-derivative coefficients
    single: list[Poly] = [
        _poly_zero() for _ in range(dim)]
    single_aux: list[list] = [[] for _ in range(dim)]
    for a in range(dim):
        pa = part(a)
        p: Poly = {}
        for c in range(dim):
            for b in range(dim):
                v = jet.RTX[c][b][part(b)][pa]
                if not v.is_zero():
                    _poly_accum(p, _poly_scale(_poly_var(n, c), v.scale("4/3")))
        for k in range(dim):
            for l in range(dim):
                for m in range(dim):
                    v = jet.dRL2[k][l][m][pa]
                    if not v.is_zero():
                        mono = _poly_mul(n, _poly_mul(n, _poly_var(n, k), _poly_var(n, l)),
                                         _poly_var(n, m))
                        _poly_accum(p, _poly_scale(mono, v.scale("-1/4")))
        single[a] = _poly_scale(p, rat(2))
        for c in range(dim):
            mat = jet.RE[c][pa]
            if any(not x.is_zero() for row in mat for x in row):
                single_aux[a].append((c, alg.endo_from_aux_matrix(
                    [[x.scale(-2) for x in row] for row in mat])))

    # scalar multiplication pieces
    divergence: Poly = {}
    for a in range(dim):
        kp: Poly = {}
        for k in range(dim):
            for l in range(dim):
                for m in range(dim):
                    v = jet.dRL2[k][l][m][part(a)]
                    if not v.is_zero():
                        mono = _poly_mul(n, _poly_mul(n, _poly_var(n, k), _poly_var(n, l)),
                                         _poly_var(n, m))
                        _poly_accum(kp, _poly_scale(mono, v.scale("1/2")))
        _poly_accum(divergence, _poly_diff(n, kp, a))
    divergence = _poly_scale(divergence, rat("-1/2"))  # -1/4 times resolution factor 2

    gradient_sq: Poly = {}
    mvec: list[Poly] = []
    for a in range(dim):
        p: Poly = {}
        for k in range(dim):
            for c in range(dim):
                v = jet.dRL1[k][c][a]
                if not v.is_zero():
                    _poly_accum(p, _poly_scale(
                        _poly_mul(n, _poly_var(n, k), _poly_var(n, c)), v))
        mvec.append(p)
    for a in range(dim):
        _poly_accum(gradient_sq,
                    _poly_scale(_poly_mul(n, mvec[a], mvec[part(a)]), rat("-2/9")))

    commutator_n: Poly = {}
    for a in range(dim):
        for c in range(dim):
            for d in range(dim):
                v = jet.RTX[c][a][d][part(a)]
                if not v.is_zero():
                    _poly_accum(commutator_n, _poly_scale(
                        _poly_mul(n, _poly_var(n, c), _poly_var(n, d)), v.scale(2)))

    def op(state: TwoPointState) -> TwoPointState:
        acc = TwoPointState(state.ctx, {})
        for (a, b), p in kpoly.items():
            acc = acc + _apply_poly(_apply_nabla0(_apply_nabla0(state, b), a), p)
        for a in range(dim):
            der = None
            if single[a] or single_aux[a]:
                der = _apply_nabla0(state, a)
            if single[a]:
                acc = acc + _apply_poly(der, single[a])
            for c, endo in single_aux[a]:
                acc = acc + _apply_poly(der.apply_endo(endo), _poly_var(n, c))
        if divergence:
            acc = acc + _apply_poly(state, divergence)
        if gradient_sq:
            acc = acc + _apply_poly(state, gradient_sq)
        if commutator_n:
            ns = _apply_poly(state, commutator_n)
            acc = acc - (ns.apply_L0() - _apply_poly(state.apply_L0(), commutator_n)).scale(rat("1/12"))
        return acc

    return op


def build_psi_endo(jet: GeometryJet, alg: ExteriorAlgebra) -> ExteriorEndo:
    """Quarter of the Clifford action of the torsion 4-form."""
    psi = _clifford_four_form(alg, jet.q,
                              lambda t: jet.dTas[t[0]][t[1]][t[2]][t[3]])
    return psi.scale(rat("1/4"))


def build_O2(jet: GeometryJet, ctx: OscillatorContext) -> Operator:
    """Second-order operator: the scalar piece plus curvature couplings of
    the spinor connection, the structure-map second derivative, the torsion
    4-form action, and the scalar-curvature shift."""
    n, q = jet.n, jet.q
    dim = 2 * n
    alg = ctx.alg
    part = lambda a: (a + n) % dim
    prime = build_O2_prime(jet, ctx)

    # spinor-connection curvature coupled to b / b+
    rbl: dict[tuple[int, int], ExteriorEndo] = {}
    for a in range(dim):
        for b in list(range(n)) + [n + j for j in range(n)]:
            endo = _quarter_cc(alg, q, lambda c, d, a=a, b=b: jet.RB[a][b][c][d])
            tr = jet.trRT10[a][b]
            if not tr.is_zero():
                endo = endo + alg.scalar_endo(tr.scale("1/2"))
            if not endo.is_zero():
                rbl[(a, b)] = endo

    # structure-map second derivative, Clifford action, coefficient -2 pi i
    d2j_endo: dict[tuple[int, int], ExteriorEndo] = {}
    for a in range(dim):
        for b in range(dim):
            endo = _quarter_cc(alg, q, lambda c, d, a=a, b=b: jet.nablaB2J[a][b][c][d])
            if not endo.is_zero():
                d2j_endo[(a, b)] = endo.scale(ExactScalar.rational(0, -2, 1))

    # constant Clifford blocks
    mixed_form = _quarter_cc(alg, q, lambda a, b: jet.trRT10[a][b].scale("1/2")).scale(rat(2))
    re_cliff = alg.zero_endo()
    for a in range(dim):
        for b in range(dim):
            mat = jet.RE[part(a)][part(b)]
            if all(x.is_zero() for row in mat for x in row):
                continue
            # (1/2) R^E(e_l, e_m) c c: prefactor 2, quarter-sum 1/4, v-frame
            # components twice the coordinate ones: net coefficient 1
            pair = alg.clifford_pair(_v_to_label(n, q, a), _v_to_label(n, q, b))
            re_cliff = re_cliff + (pair @ alg.endo_from_aux_matrix(mat))
    psi = build_psi_endo(jet, alg)
    const_endo = mixed_form + re_cliff + alg.scalar_endo(jet.rX.scale("1/4")) - psi

    def op(state: TwoPointState) -> TwoPointState:
        acc = prime(state)
        for (a, b), endo in rbl.items():
            if b < n:
                moved = state.apply_bdag(b).apply_endo(endo).scale(rat(-1))
            else:
                moved = state.apply_b(b - n).apply_endo(endo)
            acc = acc + _apply_poly(moved, _poly_var(n, a))
        for (a, b), endo in d2j_endo.items():
            acc = acc + _apply_poly(
                state.apply_endo(endo),
                _poly_mul(n, _poly_var(n, a), _poly_var(n, b)))
        if not const_endo.is_zero():
            acc = acc + state.apply_endo(const_endo)
        return acc

    return op


def _v_to_label(n: int, q: int, xi_label: int) -> int:
    """Inverse of _v_to_xi: xi-frame coordinate label to holomorphic frame label."""
    if xi_label < n:
        return n + xi_label if xi_label < q else xi_label
    j = xi_label - n
    return j if j < q else n + j


# ---------------------------------------------------------------------------
# the six-term expansion
# ---------------------------------------------------------------------------


def engine_context(jet: GeometryJet, degree_cap: int | None = None) -> OscillatorContext:
    return OscillatorContext(jet.n, jet.q, jet.rk_e, degree_cap=degree_cap)


def compute_F2_terms(jet: GeometryJet, ctx: OscillatorContext | None = None,
                     check: bool = True) -> dict[str, ExteriorEndo]:
    """Origin values of the six resolvent-expansion terms, keyed by name."""
    if check:
        rep = validate_jet(jet)
        if not rep.ok:
            raise InvalidJetError("; ".join(name for name, _ in rep.failures()))
    ctx = ctx or engine_context(jet)
    o1 = build_O1(jet, ctx)
    o2 = build_O2(jet, ctx)
    pn = ctx.kernel_projector()

    resolved_once = o1(pn).project_Nperp().resolvent_L20()
    t1 = o1(resolved_once).project_Nperp().resolvent_L20()
    t2 = o2(pn).project_Nperp().resolvent_L20()
    t5 = resolved_once.compose(resolved_once.adjoint())
    t6 = o1(resolved_once.resolvent_L20()).project_N()

    v1 = t1.evaluate_origin()
    v2 = t2.evaluate_origin()
    return {
        "double-resolved-gradient": v1,
        "resolved-second-order": v2,
        "double-resolved-gradient-adjoint": v1.adjoint(),
        "resolved-second-order-adjoint": v2.adjoint(),
        "kernel-sandwich": t5.evaluate_origin(),
        "iterated-resolvent": t6.evaluate_origin(),
    }


def compute_F2_origin(jet: GeometryJet, ctx: OscillatorContext | None = None,
                      check: bool = True,
                      terms_out: dict[str, ExteriorEndo] | None = None) -> ExteriorEndo:
    terms = compute_F2_terms(jet, ctx, check=check)
    if terms_out is not None:
        terms_out.update(terms)
    return (terms["double-resolved-gradient"]
            - terms["resolved-second-order"]
            + terms["double-resolved-gradient-adjoint"]
            - terms["resolved-second-order-adjoint"]
            + terms["kernel-sandwich"]
            - terms["iterated-resolvent"])


def b1_engine(jet: GeometryJet, ctx: OscillatorContext | None = None,
              check: bool = True) -> B1Result:
    """The engine route: compress the expansion value to the degree-q sector."""
    ctx = ctx or engine_context(jet)
    f2 = compute_F2_origin(jet, ctx, check=check)
    ie = ctx.alg.project_degree(jet.q)
    endo = ie @ f2 @ ie
    return B1Result(endo=endo, trace=endo.trace(), route="engine",
                    jet_id=jet.jet_id)
