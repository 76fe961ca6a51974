"""Exact symbolic algebra of the model operators on R^2n.

States are two-point kernels of the form

    sum  b^alpha ( xi^beta * xi'^gamma * xibar'^delta * P(Z, Z') ) (x) M

where P(Z,Z') = exp[-pi/2 sum(|xi_j|^2 + |xi'_j|^2) + pi sum xi_j xibar'_j]
is the vacuum projection kernel, b_j = -2 d/dxi_j + pi xibar_j are the
annihilation-side operators acting on the unprimed variables, and M is an
endomorphism of the exterior sector.  The primed variables are inert
parameters.  This normal-ordered basis diagonalizes the harmonic oscillator
L0 = sum_j b_j b_j^+ (eigenvalue 4 pi |alpha| per term), which turns all
spectral operations into termwise scalings.

Commutation rules used throughout:  [b_i, b_j^+] = -4 pi delta_ij,
[g, b_j] = 2 dg/dxi_j, [g, b_j^+] = -2 dg/dxibar_j, and
(b_j P)(Z,Z') = 2 pi (xibar_j - xibar'_j) P(Z,Z') with b_j^+ P = 0.

Kernel products are exact Gaussian integrals: composing two states
integrates out the middle variable by the closed-form moments of
exp(-pi|w|^2 + a wbar + b w), keeping every coefficient inside the
pi-Laurent Gaussian-rational field.
"""

from __future__ import annotations

import os
from math import comb

from .errors import DegreeCapError, KernelComponentError
from .exterior import ExteriorAlgebra, ExteriorEndo
from .scalars import ExactScalar, rat

Multi = tuple[int, ...]
TermKey = tuple[Multi, Multi, Multi, Multi]  # (alpha, beta, primed, barred-primed)

DEFAULT_DEGREE_CAP = 8


def _env_degree_cap() -> int:
    raw = os.environ.get("BERGMAN_DEGREE_CAP")
    if raw is None:
        return DEFAULT_DEGREE_CAP
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_DEGREE_CAP


class OscillatorContext:
    """Fixed data for an engine run: mode count, signature index, sector algebra."""

    def __init__(self, n: int, q: int, rk_e: int = 1, degree_cap: int | None = None,
                 alg: ExteriorAlgebra | None = None):
        if not 0 <= q <= n:
            raise ValueError("signature index out of range")
        self.n = n
        self.q = q
        self.alg = alg if alg is not None else ExteriorAlgebra(n, rk_e)
        if self.alg.n != n:
            raise ValueError("exterior algebra size mismatch")
        self.rk_e = self.alg.rk_e
        self.degree_cap = degree_cap if degree_cap is not None else _env_degree_cap()
        self.zero_multi: Multi = (0,) * n
        self._project_det = self.alg.project_det(q)
        self._identity = self.alg.identity()

    def unit(self, j: int) -> Multi:
        return tuple(1 if i == j else 0 for i in range(self.n))

    # -- state constructors --------------------------------------------------

    def vacuum(self) -> "TwoPointState":
        """The bare projection kernel P(Z,Z') with identity sector part."""
        z = self.zero_multi
        return TwoPointState(self, {(z, z, z, z): self._identity})

    def kernel_projector(self) -> "TwoPointState":
        """The full model-kernel projector: P(Z,Z') times the det-sector projector."""
        z = self.zero_multi
        return TwoPointState(self, {(z, z, z, z): self._project_det})

    def state_from_terms(self, terms: dict[TermKey, ExteriorEndo]) -> "TwoPointState":
        return TwoPointState(self, terms)


def _add_term(terms: dict[TermKey, ExteriorEndo], key: TermKey, endo: ExteriorEndo) -> None:
    if key in terms:
        terms[key] = terms[key] + endo
    else:
        terms[key] = endo


def _bump(m: Multi, j: int, by: int = 1) -> Multi:
    return m[:j] + (m[j] + by,) + m[j + 1:]


class TwoPointState:
    """A finite normal-ordered combination of oscillator kernel terms."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: OscillatorContext, terms: dict[TermKey, ExteriorEndo]):
        self.ctx = ctx
        clean = {}
        cap = ctx.degree_cap
        for key, endo in terms.items():
            if endo.is_zero():
                continue
            degree = sum(key[0]) + sum(key[1]) + sum(key[2]) + sum(key[3])
            if degree > cap:
                raise DegreeCapError(
                    f"term degree {degree} exceeds cap {cap}; "
                    "raise BERGMAN_DEGREE_CAP if this is intentional")
            clean[key] = endo
        self.terms = clean

    # -- linear structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TwoPointState") -> "TwoPointState":
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_term(out, k, v)
        return TwoPointState(self.ctx, out)

    def __neg__(self) -> "TwoPointState":
        return TwoPointState(self.ctx, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "TwoPointState") -> "TwoPointState":
        return self + (-other)

    def scale(self, c: ExactScalar) -> "TwoPointState":
        if c.is_zero():
            return TwoPointState(self.ctx, {})
        return TwoPointState(self.ctx, {k: v.scale(c) for k, v in self.terms.items()})

    def apply_endo(self, endo: ExteriorEndo) -> "TwoPointState":
        """Left-multiply the sector part by an endomorphism."""
        return TwoPointState(self.ctx, {k: endo @ v for k, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwoPointState):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"TwoPointState({len(self.terms)} terms)"

    # -- oscillator operators (all return new canonical states) ---------------

    def apply_b(self, j: int) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            _add_term(out, (_bump(a, j), b, g, d), endo)
        return TwoPointState(self.ctx, out)

    def apply_bdag(self, j: int) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            if a[j] == 0:
                continue
            c = ExactScalar.pi(1, 4 * a[j])
            _add_term(out, (_bump(a, j, -1), b, g, d), endo.scale(c))
        return TwoPointState(self.ctx, out)

    def mul_xi(self, j: int) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            _add_term(out, (a, _bump(b, j), g, d), endo)
            if a[j]:
                _add_term(out, (_bump(a, j, -1), b, g, d), endo.scale(rat(2 * a[j])))
        return TwoPointState(self.ctx, out)

    def mul_xibar(self, j: int) -> "TwoPointState":
        half_inv_pi = ExactScalar.pi(-1, "1/2")
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            _add_term(out, (_bump(a, j), b, g, d), endo.scale(half_inv_pi))
            if b[j]:
                _add_term(out, (a, _bump(b, j, -1), g, d),
                          endo.scale(ExactScalar.pi(-1, b[j])))
            _add_term(out, (a, b, g, _bump(d, j)), endo)
        return TwoPointState(self.ctx, out)

    def mul_primed(self, j: int, barred: bool = True) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            key = (a, b, g, _bump(d, j)) if barred else (a, b, _bump(g, j), d)
            _add_term(out, key, endo)
        return TwoPointState(self.ctx, out)

    def differentiate_xi(self, j: int) -> "TwoPointState":
        # d/dxi_j = (pi xibar_j - b_j)/2
        return self.mul_xibar(j).scale(ExactScalar.pi(1, "1/2")) \
            - self.apply_b(j).scale(rat("1/2"))

    def differentiate_xibar(self, j: int) -> "TwoPointState":
        # d/dxibar_j = (b_j^+ - pi xi_j)/2
        return self.apply_bdag(j).scale(rat("1/2")) \
            - self.mul_xi(j).scale(ExactScalar.pi(1, "1/2"))

    def apply_L0(self) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            tot = sum(a)
            if tot:
                out[(a, b, g, d)] = endo.scale(ExactScalar.pi(1, 4 * tot))
        return TwoPointState(self.ctx, out)

    def apply_L20(self) -> "TwoPointState":
        omega = self.ctx.alg.omega_d(self.ctx.q)
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            tot = sum(a)
            acc = (omega @ endo).scale(rat(-2))
            if tot:
                acc = acc + endo.scale(ExactScalar.pi(1, 4 * tot))
            if not acc.is_zero():
                out[(a, b, g, d)] = acc
        return TwoPointState(self.ctx, out)

    # -- spectral projections and resolvents -----------------------------------

    def project_N(self) -> "TwoPointState":
        """Keep the (alpha = 0, det-sector) component."""
        z = self.ctx.zero_multi
        proj = self.ctx._project_det
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            if a != z:
                continue
            kept = proj @ endo
            if not kept.is_zero():
                out[(a, b, g, d)] = kept
        return TwoPointState(self.ctx, out)

    def project_Nperp(self) -> "TwoPointState":
        return self - self.project_N()

    def project_N0(self) -> "TwoPointState":
        """Kernel projection of the bare oscillator (alpha = 0, every sector)."""
        z = self.ctx.zero_multi
        out = {k: v for k, v in self.terms.items() if k[0] == z}
        return TwoPointState(self.ctx, out)

    def project_N0perp(self) -> "TwoPointState":
        z = self.ctx.zero_multi
        out = {k: v for k, v in self.terms.items() if k[0] != z}
        return TwoPointState(self.ctx, out)

    def resolvent_L20(self) -> "TwoPointState":
        """Inverse of L0 - 2 omega_d; the sector eigenvalue comes from the word defect."""
        q = self.ctx.q
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            tot = sum(a)
            for defect, block in endo.row_sector_split(q).items():
                lam = 4 * tot + 4 * defect
                if lam == 0:
                    raise KernelComponentError(
                        "resolvent hit a kernel component; project it away first")
                _add_term(out, (a, b, g, d), block.scale(ExactScalar.pi(-1, f"1/{lam}")))
        return TwoPointState(self.ctx, out)

    def resolvent_L0(self) -> "TwoPointState":
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            tot = sum(a)
            if tot == 0:
                raise KernelComponentError(
                    "bare-oscillator resolvent hit an alpha = 0 component")
            out[(a, b, g, d)] = endo.scale(ExactScalar.pi(-1, f"1/{4 * tot}"))
        return TwoPointState(self.ctx, out)

    # -- conversions -----------------------------------------------------------

    def to_poly(self) -> "PolyGaussianForm":
        """Expand every b factor into multiplication form."""
        n = self.ctx.n
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in self.terms.items():
            mono: dict[TermKey, ExactScalar] = {(b, (0,) * n, g, d): rat(1)}
            for j in range(n):
                for _ in range(a[j]):
                    mono = _poly_apply_b(n, mono, j)
            for key, coeff in mono.items():
                _add_term(out, key, endo.scale(coeff))
        return PolyGaussianForm(self.ctx, out)

    @classmethod
    def from_poly(cls, poly: "PolyGaussianForm") -> "TwoPointState":
        ctx = poly.ctx
        z = ctx.zero_multi
        acc = TwoPointState(ctx, {})
        for (a, b, g, d), endo in poly.terms.items():
            s = TwoPointState(ctx, {(z, z, g, d): ctx._identity})
            for j in range(ctx.n):
                for _ in range(a[j]):
                    s = s.mul_xi(j)
                for _ in range(b[j]):
                    s = s.mul_xibar(j)
            acc = acc + s.apply_endo(endo)
        return acc

    # -- evaluation -------------------------------------------------------------

    def evaluate_origin(self) -> ExteriorEndo:
        """Kernel value at Z = Z' = 0 (the vacuum kernel is 1 there)."""
        z = self.ctx.zero_multi
        acc = self.ctx.alg.zero_endo()
        for (a, b, g, d), endo in self.to_poly().terms.items():
            if a == z and b == z and g == z and d == z:
                acc = acc + endo
        return acc

    def restrict_second_zero(self) -> "TwoPointState":
        """Kernel against second argument zero: primed monomials drop out."""
        z = self.ctx.zero_multi
        out = {k: v for k, v in self.terms.items() if k[2] == z and k[3] == z}
        return TwoPointState(self.ctx, out)

    def evaluate_first_zero(self) -> dict[tuple[Multi, Multi], ExteriorEndo]:
        """Kernel at Z = 0 as a polynomial in the primed variables."""
        z = self.ctx.zero_multi
        out: dict[tuple[Multi, Multi], ExteriorEndo] = {}
        for (a, b, g, d), endo in self.to_poly().terms.items():
            if a == z and b == z:
                key = (g, d)
                if key in out:
                    out[key] = out[key] + endo
                else:
                    out[key] = endo
        return {k: v for k, v in out.items() if not v.is_zero()}

    # -- kernel adjoint and composition -------------------------------------------

    def adjoint(self) -> "TwoPointState":
        """Kernel adjoint: swap arguments, conjugate, adjoint the sector part."""
        poly = self.to_poly()
        out: dict[TermKey, ExteriorEndo] = {}
        for (a, b, g, d), endo in poly.terms.items():
            _add_term(out, (d, g, b, a), endo.adjoint())
        return TwoPointState.from_poly(PolyGaussianForm(self.ctx, out))

    def compose(self, other: "TwoPointState") -> "TwoPointState":
        """Exact integral over the shared middle argument of self(Z,W) other(W,Z')."""
        ctx = self.ctx
        n = ctx.n
        pa = self.to_poly()
        pb = other.to_poly()
        out: dict[TermKey, ExteriorEndo] = {}
        for (a1, b1, g1, d1), e1 in pa.terms.items():
            for (a2, b2, g2, d2), e2 in pb.terms.items():
                endo = e1 @ e2
                if endo.is_zero():
                    continue
                base = endo
                # per-mode moments of w^(g1+a2) wbar^(d1+b2) against the middle Gaussian
                monos: list[tuple[Multi, Multi, ExactScalar]] = [
                    ((0,) * n, (0,) * n, rat(1))]
                for j in range(n):
                    wp = g1[j] + a2[j]
                    wb = d1[j] + b2[j]
                    factors = _mode_moment(wp, wb)
                    monos = [
                        (_bump(xi, j, dx) if dx else xi,
                         _bump(bp, j, db) if db else bp,
                         c0 * cf)
                        for (xi, bp, c0) in monos
                        for (dx, db, cf) in factors
                    ]
                for (xi_extra, bp_extra, coeff) in monos:
                    key = (tuple(x + y for x, y in zip(a1, xi_extra)), b1, g2,
                           tuple(x + y for x, y in zip(d2, bp_extra)))
                    _add_term(out, key, base.scale(coeff))
        return TwoPointState.from_poly(PolyGaussianForm(ctx, out))

    def pair(self, other: "TwoPointState") -> ExteriorEndo:
        """Gram pairing of kernel columns: integral of self(W,0)^* other(W,0)."""
        return self.adjoint().compose(other).evaluate_origin()

    def to_json(self) -> list[dict[str, object]]:
        """Debug dump of the canonical term list; no stable wire format promised."""
        out = []
        for (a, b, g, d) in sorted(self.terms):
            out.append({
                "b_word": list(a),
                "xi": list(b),
                "primed": list(g),
                "barred_primed": list(d),
                "endo": self.terms[(a, b, g, d)].to_json(),
            })
        return out


class PolyGaussianForm:
    """Polynomial-times-vacuum-kernel form of a state; interconvertible with it."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: OscillatorContext, terms: dict[TermKey, ExteriorEndo]):
        self.ctx = ctx
        self.terms = {k: v for k, v in terms.items() if not v.is_zero()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyGaussianForm):
            return NotImplemented
        return self.terms == other.terms

    def apply_L0_directly(self) -> "PolyGaussianForm":
        """Independent oracle: L0 as a raw differential operator on the polynomial."""
        n = self.ctx.n
        acc: dict[TermKey, ExteriorEndo] = {}
        for key, endo in self.terms.items():
            mono = {key: rat(1)}
            total: dict[TermKey, ExactScalar] = {}
            for j in range(n):
                stage = _poly_apply_bdag(n, mono, j)
                stage = _poly_apply_b(n, stage, j)
                for k, c in stage.items():
                    total[k] = total.get(k, ExactScalar.zero()) + c
            for k, c in total.items():
                if k in acc:
                    acc[k] = acc[k] + endo.scale(c)
                else:
                    acc[k] = endo.scale(c)
        return PolyGaussianForm(self.ctx, acc)


def _poly_apply_b(n: int, mono: dict[TermKey, ExactScalar], j: int) -> dict[TermKey, ExactScalar]:
    """b_j on f*P: (-2 df/dxi_j + 2 pi (xibar_j - xibar'_j) f) P."""
    out: dict[TermKey, ExactScalar] = {}

    def add(key: TermKey, c: ExactScalar):
        if key in out:
            out[key] = out[key] + c
        else:
            out[key] = c

    for (a, b, g, d), coeff in mono.items():
        if a[j]:
            add((_bump(a, j, -1), b, g, d), coeff.scale(-2 * a[j]))
        add((a, _bump(b, j), g, d), coeff * ExactScalar.pi(1, 2))
        add((a, b, g, _bump(d, j)), coeff * ExactScalar.pi(1, -2))
    return out


def _poly_apply_bdag(n: int, mono: dict[TermKey, ExactScalar], j: int) -> dict[TermKey, ExactScalar]:
    """b_j^+ on f*P: (2 df/dxibar_j) P."""
    out: dict[TermKey, ExactScalar] = {}
    for (a, b, g, d), coeff in mono.items():
        if b[j]:
            key = (a, _bump(b, j, -1), g, d)
            c = coeff.scale(2 * b[j])
            if key in out:
                out[key] = out[key] + c
            else:
                out[key] = c
    return out


def _mode_moment(wp: int, wb: int) -> list[tuple[int, int, ExactScalar]]:
    """Moments of one middle mode.

    integral of w^wp wbar^wb exp(-pi|w|^2 + pi xi wbar + pi w xibar') over C
    equals  sum_k  wp! wb! / (k! (wp-k)! (wb-k)!)  pi^-k  xi^(wp-k) xibar'^(wb-k)
    times the reassembled vacuum kernel factor.  Returns triples of
    (xi power, xibar' power, coefficient).
    """
    res = []
    for k in range(min(wp, wb) + 1):
        coeff = comb(wp, k) * _falling(wb, k)
        res.append((wp - k, wb - k, ExactScalar.pi(-k, coeff)))
    return res


def _falling(b: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= b - i
    return out
