"""Direct evaluation of the subleading kernel coefficient from a jet.

The coefficient is an endomorphism of the degree-q exterior sector tensored
with the auxiliary bundle.  Its pi-multiple is assembled from seven blocks:
a scalar block on the distinguished wedge word, a mixed double-transvection
block, two single wedge-contract blocks carrying the curvature 2-form
aggregate and the second derivative of the structure map, and two double
wedge-contract blocks carrying the torsion 4-form and quadratic structure-
derivative products.  All contractions are taken in the xi-adapted frame;
normalized-frame slots contribute a factor sqrt(2) each and always appear
in even totals, so every constant below is an exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidJetError, NotKahlerError, NotPositiveError
from .exterior import ExteriorAlgebra, ExteriorEndo
from .geometry import GeometryJet, lambda_scalars, validate_jet
from .scalars import ExactScalar, rat

_ZERO = ExactScalar.zero()


@dataclass(frozen=True)
class B1Result:
    """A computed coefficient with its trace, evaluation route, and source jet."""

    endo: ExteriorEndo
    trace: ExactScalar
    route: str
    jet_id: str

    def to_json(self) -> dict[str, object]:
        return {
            "route": self.route,
            "jet_id": self.jet_id,
            "trace": self.trace.to_json(),
            "endo": self.endo.to_json(),
        }


def _require_valid(jet: GeometryJet) -> None:
    rep = validate_jet(jet)
    if not rep.ok:
        raise InvalidJetError("; ".join(name for name, _ in rep.failures()))


def _aux_endo(alg: ExteriorAlgebra, mat) -> ExteriorEndo:
    return alg.endo_from_aux_matrix(mat)


def _mat_sum_mixed(jet: GeometryJet):
    """sum_j RE[u_j][ubar_j] as an auxiliary matrix, normalized frame."""
    n, rk = jet.n, jet.rk_e
    out = [[_ZERO for _ in range(rk)] for _ in range(rk)]
    for j in range(n):
        m = jet.RE[j][n + j]
        for r in range(rk):
            for c in range(rk):
                out[r][c] = out[r][c] + m[r][c].scale(2)
    return out


def restricted_gradient_norm(jet: GeometryJet, tensor) -> ExactScalar:
    """sum_{i,j,k} |<(nabla_{u_i} .) u_j, u_k>|^2 in the normalized frame."""
    n = jet.n
    acc = _ZERO
    for i in range(n):
        for j in range(n):
            for k in range(n):
                v = tensor[i][j][k]
                if not v.is_zero():
                    acc = acc + v * tensor[n + i][n + j][n + k]
    return acc.scale(8)


def b1_formula(jet: GeometryJet, alg: ExteriorAlgebra | None = None,
               check: bool = True) -> B1Result:
    """The full mixed-signature coefficient formula, evaluated exactly."""
    if check:
        _require_valid(jet)
    n, q, rk = jet.n, jet.q, jet.rk_e
    alg = alg or ExteriorAlgebra(n, rk)
    lam = lambda_scalars(jet)
    proj = alg.project_det(q)
    nbj = jet.nablaBJ

    # scalar block on the distinguished word
    block = proj.scale(
        _trace_form_sum(jet).scale("1/4")
        - lam.contracted_divergence.scale("1/16")
        - restricted_gradient_norm(jet, nbj).scale("1/144"))
    block = block + (_aux_endo(alg, _mat_sum_mixed(jet)) @ proj).scale(rat("1/2"))

    # mixed double transvection: wedge(l) contract(i) proj wedge(j) contract(k)
    for i in range(1, q + 1):
        for j in range(1, q + 1):
            for k in range(q + 1, n + 1):
                for l in range(q + 1, n + 1):
                    coeff = _ZERO
                    for m in range(n):
                        a = nbj[m][j - 1][k - 1]
                        b = nbj[n + m][n + i - 1][n + l - 1]
                        if not a.is_zero() and not b.is_zero():
                            coeff = coeff + a * b
                    if coeff.is_zero():
                        continue
                    op = (alg.wedge(l) @ alg.contract(i) @ proj
                          @ alg.wedge(j) @ alg.contract(k))
                    block = block + op.scale(coeff.scale("1/9"))  # 8/72

    # single wedge-contract blocks with the curvature aggregate
    for j in range(1, q + 1):
        for k in range(q + 1, n + 1):
            # barred slots act on the left of the projector
            p_sc = lam.p_form[n + j - 1][n + k - 1].scale(2)
            d2j = _ZERO
            for i in range(n):
                d2j = d2j + jet.nablaB2J[i][n + i][n + j - 1][n + k - 1]
            coeff = p_sc - d2j.scale(0, "4/3")  # -(i/3) * 4(slot factor)
            op = alg.wedge(k) @ alg.contract(j) @ proj
            block = block + op.scale(coeff.scale("-1/4"))
            block = block + (op @ _aux_endo(alg, _scale_mat(jet.RE[n + j - 1][n + k - 1], rat(2)))).scale(rat("-1/4"))

            p_sc = lam.p_form[k - 1][j - 1].scale(2)
            d2j = _ZERO
            for i in range(n):
                d2j = d2j + jet.nablaB2J[n + i][i][k - 1][j - 1]
            coeff = p_sc - d2j.scale(0, "4/3")
            op = proj @ alg.wedge(j) @ alg.contract(k)
            block = block + op.scale(coeff.scale("-1/4"))
            block = block + (op @ _aux_endo(alg, _scale_mat(jet.RE[k - 1][j - 1], rat(2)))).scale(rat("-1/4"))

    # double wedge-contract blocks
    for i in range(1, q + 1):
        for j in range(1, q + 1):
            for k in range(q + 1, n + 1):
                for l in range(q + 1, n + 1):
                    co = jet.dTas[n + i - 1][n + j - 1][n + k - 1][n + l - 1].scale("1/2")
                    s15 = _ZERO
                    s10 = _ZERO
                    for m in range(n):
                        s15 = s15 + nbj[m][n + i - 1][n + l - 1] * nbj[n + m][n + j - 1][n + k - 1]
                        s10 = s10 + nbj[n + m][n + i - 1][n + l - 1] * nbj[m][n + j - 1][n + k - 1]
                    co = co - s15.scale("8/15") - s10.scale("4/5")
                    if not co.is_zero():
                        op = (alg.wedge(k) @ alg.wedge(l)
                              @ alg.contract(i) @ alg.contract(j) @ proj)
                        block = block + op.scale(co.scale("1/8"))

                    co = jet.dTas[i - 1][j - 1][k - 1][l - 1].scale("1/2")
                    s15 = _ZERO
                    s10 = _ZERO
                    for m in range(n):
                        s15 = s15 + nbj[n + m][i - 1][l - 1] * nbj[m][j - 1][k - 1]
                        s10 = s10 + nbj[m][i - 1][l - 1] * nbj[n + m][j - 1][k - 1]
                    co = co - s15.scale("8/15") - s10.scale("4/5")
                    if not co.is_zero():
                        op = (proj @ alg.wedge(i) @ alg.wedge(j)
                              @ alg.contract(l) @ alg.contract(k))
                        block = block + op.scale(co.scale("1/8"))

    endo = block.scale(ExactScalar.pi(-1))
    return B1Result(endo=endo, trace=endo.trace(), route="closed-form",
                    jet_id=jet.jet_id)


def _scale_mat(mat, c: ExactScalar):
    return [[v * c for v in row] for row in mat]


def _trace_form_sum(jet: GeometryJet) -> ExactScalar:
    acc = _ZERO
    for j in range(jet.n):
        acc = acc + jet.trRT10[j][jet.n + j]
    return acc.scale(2)


def b1_trace(jet: GeometryJet, check: bool = True) -> ExactScalar:
    """The degree-sector trace of the coefficient, from its closed scalar form."""
    if check:
        _require_valid(jet)
    lam = lambda_scalars(jet)
    re_sum = _mat_sum_mixed(jet)
    tr_e = _ZERO
    for r in range(jet.rk_e):
        tr_e = tr_e + re_sum[r][r]
    pi_tr = (tr_e.scale("1/2")
             + (_trace_form_sum(jet).scale("1/4")
                - lam.contracted_divergence.scale("1/16")).scale(jet.rk_e))
    return pi_tr * ExactScalar.pi(-1)


def b1_kahler(jet: GeometryJet, alg: ExteriorAlgebra | None = None,
              check: bool = True) -> B1Result:
    """Torsion-free specialization of the coefficient formula."""
    if check:
        _require_valid(jet)
    if not jet.is_torsion_free():
        raise NotKahlerError("jet has torsion; the specialized formula does not apply")
    n, q, rk = jet.n, jet.q, jet.rk_e
    alg = alg or ExteriorAlgebra(n, rk)
    proj = alg.project_det(q)
    nxj = jet.nablaXJ

    block = proj.scale(_trace_form_sum(jet).scale("1/4")
                       - restricted_gradient_norm(jet, nxj).scale("1/144"))
    block = block + (_aux_endo(alg, _mat_sum_mixed(jet)) @ proj).scale(rat("1/2"))

    for i in range(1, q + 1):
        for j in range(1, q + 1):
            for k in range(q + 1, n + 1):
                for l in range(q + 1, n + 1):
                    coeff = _ZERO
                    for m in range(n):
                        a = nxj[m][j - 1][k - 1]
                        b = nxj[n + m][n + i - 1][n + l - 1]
                        if not a.is_zero() and not b.is_zero():
                            coeff = coeff + a * b
                    if coeff.is_zero():
                        continue
                    op = (alg.wedge(l) @ alg.contract(i) @ proj
                          @ alg.wedge(j) @ alg.contract(k))
                    block = block + op.scale(coeff.scale("1/9"))

    for j in range(1, q + 1):
        for k in range(q + 1, n + 1):
            curv = _ZERO
            for i in range(n):
                curv = curv + jet.RTX[i][n + i][n + j - 1][n + k - 1]
            coeff = (jet.trRT10[n + j - 1][n + k - 1]
                     - curv.scale("2/3"))  # (1/2 tr)(2x) and (1/6)(4x) slot factors
            op = alg.wedge(k) @ alg.contract(j) @ proj
            block = block + op.scale(coeff.scale("-1/4"))
            block = block + (op @ _aux_endo(alg, _scale_mat(jet.RE[n + j - 1][n + k - 1], rat(2)))).scale(rat("-1/4"))

            curv = _ZERO
            for i in range(n):
                curv = curv + jet.RTX[i][n + i][k - 1][j - 1]
            coeff = (jet.trRT10[k - 1][j - 1] - curv.scale("2/3"))
            op = proj @ alg.wedge(j) @ alg.contract(k)
            block = block + op.scale(coeff.scale("-1/4"))
            block = block + (op @ _aux_endo(alg, _scale_mat(jet.RE[k - 1][j - 1], rat(2)))).scale(rat("-1/4"))

    endo = block.scale(ExactScalar.pi(-1))
    return B1Result(endo=endo, trace=endo.trace(), route="closed-form",
                    jet_id=jet.jet_id)


def b1_positive(jet: GeometryJet, alg: ExteriorAlgebra | None = None,
                check: bool = True) -> B1Result:
    """The classical positive-curvature form: aux curvature trace plus an
    eighth of the scalar curvature."""
    if check:
        _require_valid(jet)
    if jet.q != 0:
        raise NotPositiveError("specialization requires signature index q = 0")
    n, rk = jet.n, jet.rk_e
    alg = alg or ExteriorAlgebra(n, rk)
    proj = alg.project_det(0)
    block = (_aux_endo(alg, _mat_sum_mixed(jet)) @ proj).scale(rat("1/2"))
    block = block + proj.scale(jet.rX.scale("1/8"))
    endo = block.scale(ExactScalar.pi(-1))
    return B1Result(endo=endo, trace=endo.trace(), route="closed-form",
                    jet_id=jet.jet_id)
