"""Exterior algebra on n anti-holomorphic generators with Clifford actions.

The state space is Lambda(W*) tensor C^rkE, where W* has generators
vb^1, ..., vb^n (the duals of an orthonormal anti-holomorphic frame
vb_1, ..., vb_n).  Wedge words are subsets of {1..n} stored with strictly
increasing indices; the auxiliary index varies fastest in the flattened
basis so serialization is deterministic.

Clifford conventions.  For a complexified tangent vector v with parts
(v10, v01) the Clifford action is c(v) = sqrt(2) (dual(v10) wedge - i_{v01}),
so c(v_j) = sqrt(2) vb^j wedge and c(vb_j) = -sqrt(2) i_{vb_j}.  A single
factor carries sqrt(2), which is irrational; every quantity this package
evaluates is an even product of factors, so products are exposed through
:class:`CliffordFactor`, which tracks the pending power of sqrt(2) and only
materializes an exact matrix when that power is even.

Complex frame labels: an integer a in 0..2n-1 denotes v_{a+1} for a < n and
vb_{a-n+1} for a >= n.  Metric pairing partners v_j <-> vb_j implement frame
resolutions of identity without ever leaving exact arithmetic.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

from .scalars import ExactScalar, rat

Scalar = ExactScalar
CompFn = Callable[[int, int], ExactScalar]

_HALF = ExactScalar.rational("1/2")
_HALF_NEG = ExactScalar.rational("-1/2")
_TWO = ExactScalar.rational(2)
_MINUS_TWO = ExactScalar.rational(-2)
_FOUR = ExactScalar.rational(4)


def _lex_words(n: int) -> list[tuple[int, ...]]:
    words = [tuple(sorted(w)) for w in _all_subsets(n)]
    return sorted(words)


def _all_subsets(n: int) -> Iterable[tuple[int, ...]]:
    for mask in range(1 << n):
        yield tuple(j + 1 for j in range(n) if mask >> j & 1)


class ExteriorAlgebra:
    """Basis bookkeeping for Lambda(W*) tensor C^rkE with n generators."""

    def __init__(self, n: int, rk_e: int = 1):
        if n < 1:
            raise ValueError("need at least one generator")
        if rk_e < 1:
            raise ValueError("auxiliary rank must be positive")
        self.n = n
        self.rk_e = rk_e
        self.words = _lex_words(n)
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.dim = len(self.words) * rk_e

    def basis_index(self, word: tuple[int, ...], e: int = 0) -> int:
        return self.word_index[word] * self.rk_e + e

    def basis_labels(self) -> list[tuple[tuple[int, ...], int]]:
        return [(w, e) for w in self.words for e in range(self.rk_e)]

    # -- elementary endomorphisms -------------------------------------------

    def zero_endo(self) -> "ExteriorEndo":
        return ExteriorEndo(self, {})

    def identity(self) -> "ExteriorEndo":
        one = rat(1)
        return ExteriorEndo(self, {(i, i): one for i in range(self.dim)})

    def scalar_endo(self, c: ExactScalar) -> "ExteriorEndo":
        if c.is_zero():
            return self.zero_endo()
        return ExteriorEndo(self, {(i, i): c for i in range(self.dim)})

    def endo_from_aux_matrix(self, mat: Sequence[Sequence[ExactScalar]]) -> "ExteriorEndo":
        """Id on the wedge factor tensored with a rk_e x rk_e matrix."""
        entries: dict[tuple[int, int], ExactScalar] = {}
        for w in self.words:
            base = self.word_index[w] * self.rk_e
            for r in range(self.rk_e):
                for c in range(self.rk_e):
                    v = mat[r][c]
                    if not v.is_zero():
                        entries[(base + r, base + c)] = v
        return ExteriorEndo(self, entries)

    def wedge(self, j: int) -> "ExteriorEndo":
        """Exterior multiplication by the generator vb^j, 1-based."""
        entries: dict[tuple[int, int], ExactScalar] = {}
        for w in self.words:
            if j in w:
                continue
            pos = sum(1 for s in w if s < j)
            sign = rat(-1 if pos % 2 else 1)
            target = tuple(sorted(w + (j,)))
            for e in range(self.rk_e):
                entries[(self.basis_index(target, e), self.basis_index(w, e))] = sign
        return ExteriorEndo(self, entries)

    def contract(self, j: int) -> "ExteriorEndo":
        """Interior multiplication i_{vb_j}, 1-based."""
        entries: dict[tuple[int, int], ExactScalar] = {}
        for w in self.words:
            if j not in w:
                continue
            pos = w.index(j)
            sign = rat(-1 if pos % 2 else 1)
            target = tuple(s for s in w if s != j)
            for e in range(self.rk_e):
                entries[(self.basis_index(target, e), self.basis_index(w, e))] = sign
        return ExteriorEndo(self, entries)

    def omega_d(self, q: int) -> "ExteriorEndo":
        """Diagonal degree operator; eigenvalue -2 pi (defect count of the word).

        The defect of a word S relative to the distinguished word {1..q} is
        #(j <= q missing from S) + #(j > q present in S); the kernel is
        exactly the {1..q} sector.
        """
        entries: dict[tuple[int, int], ExactScalar] = {}
        for w in self.words:
            d = self.word_defect(w, q)
            if d == 0:
                continue
            val = ExactScalar.pi(1, -2 * d)
            for e in range(self.rk_e):
                idx = self.basis_index(w, e)
                entries[(idx, idx)] = val
        return ExteriorEndo(self, entries)

    def word_defect(self, word: tuple[int, ...], q: int) -> int:
        missing = sum(1 for j in range(1, q + 1) if j not in word)
        extra = sum(1 for j in word if j > q)
        return missing + extra

    def det_word(self, q: int) -> tuple[int, ...]:
        return tuple(range(1, q + 1))

    def project_det(self, q: int) -> "ExteriorEndo":
        """Orthogonal projection onto the {1..q} wedge word (all aux indices)."""
        w = self.det_word(q)
        one = rat(1)
        entries = {}
        for e in range(self.rk_e):
            idx = self.basis_index(w, e)
            entries[(idx, idx)] = one
        return ExteriorEndo(self, entries)

    def project_degree(self, q: int) -> "ExteriorEndo":
        """Orthogonal projection onto all degree-q wedge words (all aux indices)."""
        one = rat(1)
        entries = {}
        for w in self.words:
            if len(w) != q:
                continue
            for e in range(self.rk_e):
                idx = self.basis_index(w, e)
                entries[(idx, idx)] = one
        return ExteriorEndo(self, entries)

    # -- Clifford action -----------------------------------------------------

    def partner(self, a: int) -> int:
        """Metric pairing partner of a complex frame label: v_j <-> vb_j."""
        return a - self.n if a >= self.n else a + self.n

    def clifford_factor(self, a: int) -> "CliffordFactor":
        """The single Clifford factor c(V_a) with its sqrt(2) tracked aside."""
        if a < self.n:
            return CliffordFactor(self.wedge(a + 1), 1)
        return CliffordFactor(-self.contract(a - self.n + 1), 1)

    def clifford_vector(self, coeffs: dict[int, ExactScalar]) -> "CliffordFactor":
        """c(v) for v = sum coeffs[a] V_a over complex frame labels."""
        m = self.zero_endo()
        for a, c in coeffs.items():
            if c.is_zero():
                continue
            m = m + self.clifford_factor(a).matrix.scale(c)
        return CliffordFactor(m, 1)

    def clifford_pair(self, a: int, b: int) -> "ExteriorEndo":
        """The exact even product c(V_a) c(V_b)."""
        return (self.clifford_factor(a) * self.clifford_factor(b)).as_endo()

    def clifford_of_form(self, degree: int, comp: Callable[[tuple[int, ...]], ExactScalar]) -> "ExteriorEndo":
        """Clifford contraction of a totally antisymmetric degree-d form.

        `comp` returns the form on complex frame labels.  For an orthonormal
        real frame the operator is sum_{i1<...<id} B(e_{i1},..) c(e_{i1}).. ;
        summing the complex resolution of identity in every slot yields
        (1/d!) sum_{a1..ad} B(partner(a1),..,partner(ad)) c(V_{a1})..c(V_{ad}).
        Only even degrees are supported (odd ones would strand a sqrt(2)).
        """
        if degree % 2:
            raise ValueError("only even-degree forms act within exact arithmetic")
        labels = range(2 * self.n)
        acc = self.zero_endo()
        fact = 1
        for k in range(2, degree + 1):
            fact *= k

        def rec(prefix: tuple[int, ...], factor: "CliffordFactor | None"):
            nonlocal acc
            if len(prefix) == degree:
                coeff = comp(tuple(self.partner(a) for a in prefix))
                if not coeff.is_zero():
                    acc = acc + factor.as_endo().scale(coeff)
                return
            for a in labels:
                nxt = self.clifford_factor(a) if factor is None else factor * self.clifford_factor(a)
                if nxt.matrix.is_zero():
                    continue
                rec(prefix + (a,), nxt)

        rec((), None)
        return acc.scale_fraction(1, fact)

    def action_two_form(self, comp: CompFn) -> "ExteriorEndo":
        """(1/4) A(e_i, e_j) c(e_i) c(e_j) for an antisymmetric bilinear A.

        `comp(a, b)` gives A on complex frame labels (either a 2-form or
        <A' . , .> for a skew-adjoint endomorphism A').  Expanding the real
        frame sum through the complex resolution gives the four-block form:
        a scalar block, a wedge-contract block, a double contraction block
        and a double wedge block.
        """
        n = self.n
        acc = self.zero_endo()
        scalar = ExactScalar.zero()
        for j in range(n):
            scalar = scalar + comp(j, n + j)
        acc = acc + self.scalar_endo(scalar * _HALF_NEG)
        for j in range(n):
            for k in range(n):
                c = comp(j, n + k)
                if not c.is_zero():
                    acc = acc + (self.wedge(k + 1) @ self.contract(j + 1)).scale(c)
                c = comp(j, k)
                if not c.is_zero():
                    acc = acc + (self.contract(j + 1) @ self.contract(k + 1)).scale(c * _HALF)
                c = comp(n + j, n + k)
                if not c.is_zero():
                    acc = acc + (self.wedge(j + 1) @ self.wedge(k + 1)).scale(c * _HALF)
        return acc

    def action_two_form_bruteforce(self, comp: CompFn) -> "ExteriorEndo":
        """Oracle for :meth:`action_two_form` by raw Clifford products."""
        acc = self.zero_endo()
        for a in range(2 * self.n):
            for b in range(2 * self.n):
                c = comp(self.partner(a), self.partner(b))
                if c.is_zero():
                    continue
                acc = acc + self.clifford_pair(a, b).scale(c)
        return acc.scale_fraction(1, 4)

    def compress_two_form(self, q: int, comp_xi: CompFn) -> "ExteriorEndo":
        """Right side of the det-sector compression identity for 2-forms.

        `comp_xi(a, b)` gives the form on the xi-adapted coordinate frame
        (labels 0..n-1 unbarred, n..2n-1 barred).  Returns the four displayed
        blocks times the det-word projector; equals
        clifford_of_form(2-form) composed with project_det, computed
        independently.
        """
        n = self.n
        proj = self.project_det(q)
        scalar = ExactScalar.zero()
        for j in range(n):
            scalar = scalar + comp_xi(j, n + j)
        acc = proj.scale(scalar * _MINUS_TWO)
        for j in range(1, q + 1):
            for k in range(q + 1, n + 1):
                c = comp_xi(n + j - 1, n + k - 1)
                if not c.is_zero():
                    acc = acc + (self.wedge(k) @ self.contract(j) @ proj).scale(c * _FOUR)
        for j in range(1, q + 1):
            for k in range(1, q + 1):
                c = comp_xi(n + j - 1, n + k - 1)
                if not c.is_zero():
                    acc = acc + (self.contract(j) @ self.contract(k) @ proj).scale(c * _TWO)
        for j in range(q + 1, n + 1):
            for k in range(q + 1, n + 1):
                c = comp_xi(n + j - 1, n + k - 1)
                if not c.is_zero():
                    acc = acc + (self.wedge(j) @ self.wedge(k) @ proj).scale(c * _TWO)
        return acc


class ExteriorEndo:
    """Sparse matrix over ExactScalar in the wedge-word (x) aux basis."""

    __slots__ = ("alg", "entries")

    def __init__(self, alg: ExteriorAlgebra, entries: dict[tuple[int, int], ExactScalar]):
        self.alg = alg
        self.entries = {k: v for k, v in entries.items() if not v.is_zero()}

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other: "ExteriorEndo") -> "ExteriorEndo":
        if self.alg is not other.alg and self.alg.dim != other.alg.dim:
            raise ValueError("algebra mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out[k] + v if k in out else v
        return ExteriorEndo(self.alg, out)

    def __neg__(self) -> "ExteriorEndo":
        return ExteriorEndo(self.alg, {k: -v for k, v in self.entries.items()})

    def __sub__(self, other: "ExteriorEndo") -> "ExteriorEndo":
        return self + (-other)

    def __matmul__(self, other: "ExteriorEndo") -> "ExteriorEndo":
        cols: dict[int, list[tuple[int, ExactScalar]]] = {}
        for (r, c), v in other.entries.items():
            cols.setdefault(r, []).append((c, v))
        out: dict[tuple[int, int], ExactScalar] = {}
        for (r, mid), v in self.entries.items():
            for c, w in cols.get(mid, ()):
                key = (r, c)
                prod = v * w
                out[key] = out[key] + prod if key in out else prod
        return ExteriorEndo(self.alg, out)

    def scale(self, c: ExactScalar) -> "ExteriorEndo":
        if c.is_zero():
            return ExteriorEndo(self.alg, {})
        return ExteriorEndo(self.alg, {k: v * c for k, v in self.entries.items()})

    def scale_fraction(self, p: int, q: int = 1) -> "ExteriorEndo":
        return self.scale(ExactScalar.rational(f"{p}/{q}"))

    def adjoint(self) -> "ExteriorEndo":
        return ExteriorEndo(
            self.alg, {(c, r): v.conjugate() for (r, c), v in self.entries.items()}
        )

    def trace(self) -> ExactScalar:
        t = ExactScalar.zero()
        for (r, c), v in self.entries.items():
            if r == c:
                t = t + v
        return t

    def apply(self, elem: "ExteriorElement") -> "ExteriorElement":
        out: dict[int, ExactScalar] = {}
        for (r, c), v in self.entries.items():
            coeff = elem.coeffs.get(c)
            if coeff is None:
                continue
            acc = v * coeff
            out[r] = out[r] + acc if r in out else acc
        return ExteriorElement(self.alg, out)

    def row_sector_split(self, q: int) -> dict[int, "ExteriorEndo"]:
        """Group rows by word defect; the defect fixes the degree-operator eigenvalue."""
        buckets: dict[int, dict[tuple[int, int], ExactScalar]] = {}
        rk = self.alg.rk_e
        for (r, c), v in self.entries.items():
            word = self.alg.words[r // rk]
            d = self.alg.word_defect(word, q)
            buckets.setdefault(d, {})[(r, c)] = v
        return {d: ExteriorEndo(self.alg, e) for d, e in buckets.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExteriorEndo):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(frozenset(self.entries.items()))

    def __repr__(self) -> str:
        if not self.entries:
            return "ExteriorEndo(0)"
        items = ", ".join(
            f"({r},{c}): {v}" for (r, c), v in sorted(self.entries.items())
        )
        return f"ExteriorEndo({items})"

    def to_json(self) -> dict[str, object]:
        """Row-major dense dump; entries are pi-term lists."""
        dim = self.alg.dim
        rows = []
        for r in range(dim):
            row = []
            for c in range(dim):
                v = self.entries.get((r, c))
                row.append(v.to_json() if v is not None else [])
            rows.append(row)
        return {"n": self.alg.n, "rk_e": self.alg.rk_e, "matrix": rows}

    @classmethod
    def from_json(cls, alg: ExteriorAlgebra, data: dict[str, object]) -> "ExteriorEndo":
        entries: dict[tuple[int, int], ExactScalar] = {}
        matrix = data["matrix"]
        for r, row in enumerate(matrix):
            for c, payload in enumerate(row):
                if payload:
                    entries[(r, c)] = ExactScalar.from_json(payload)
        return cls(alg, entries)


class ExteriorElement:
    """A vector in Lambda(W*) tensor C^rkE, sparse over basis indices."""

    __slots__ = ("alg", "coeffs")

    def __init__(self, alg: ExteriorAlgebra, coeffs: dict[int, ExactScalar]):
        self.alg = alg
        self.coeffs = {k: v for k, v in coeffs.items() if not v.is_zero()}

    @classmethod
    def basis(cls, alg: ExteriorAlgebra, word: tuple[int, ...], e: int = 0) -> "ExteriorElement":
        return cls(alg, {alg.basis_index(word, e): rat(1)})

    def __add__(self, other: "ExteriorElement") -> "ExteriorElement":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return ExteriorElement(self.alg, out)

    def scale(self, c: ExactScalar) -> "ExteriorElement":
        return ExteriorElement(self.alg, {k: v * c for k, v in self.coeffs.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExteriorElement):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"ExteriorElement({self.coeffs})"


class CliffordFactor:
    """A product of Clifford factors with its power of sqrt(2) kept symbolic."""

    __slots__ = ("matrix", "half_powers")

    def __init__(self, matrix: ExteriorEndo, half_powers: int):
        self.matrix = matrix
        self.half_powers = half_powers

    def __mul__(self, other: "CliffordFactor") -> "CliffordFactor":
        return CliffordFactor(self.matrix @ other.matrix, self.half_powers + other.half_powers)

    def as_endo(self) -> ExteriorEndo:
        if self.half_powers % 2:
            raise ValueError("odd number of Clifford factors leaves a stray sqrt(2)")
        return self.matrix.scale(rat(2 ** (self.half_powers // 2)))

    def anticommutator(self, other: "CliffordFactor") -> ExteriorEndo:
        return (self * other).as_endo() + (other * self).as_endo()
