"""Truncated multivariate power series ("jets") over complex scalars.

A jet represents a holomorphic germ at the origin up to a fixed total order
``K``: a dense table of complex coefficients indexed by multi-indices of
total degree at most ``K``.  All differential-geometric identities in this
package are evaluated as residuals of jets, so the kernel favours plain
``numpy`` coefficient arrays with precomputed index tables for the Cauchy
product, partial derivatives and integration.

Jets are immutable after construction.  Every jet carries an *effective
order*: the highest total degree at which its coefficients are trustworthy.
A fresh jet has effective order ``K``; a partial derivative lowers it by
one (the top coefficients of the result would need unknown order-``K+1``
data, so they are stored as zeros and excluded from residual norms).
Binary operations propagate the minimum of the operands' effective orders.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidAnchorError, ShapeError, SingularInputError

DEFAULT_ORDER = 4

_EPS = np.finfo(float).eps


def _compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            out.append((head,) + tail)
    return out


class JetSpace:
    """Shared index tables for all jets with a fixed (num_vars, order).

    Obtain instances through :func:`jet_space`; the factory caches them so
    spaces compare by identity.
    """

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1:
            raise ShapeError(f"num_vars must be positive, got {num_vars}")
        if order < 0:
            raise ShapeError(f"order must be non-negative, got {order}")
        self.num_vars = num_vars
        self.order = order

        exponents: list[tuple[int, ...]] = []
        for d in range(order + 1):
            exponents.extend(_compositions(d, num_vars))
        self.exponents: tuple[tuple[int, ...], ...] = tuple(exponents)
        self.size = len(exponents)
        self.index_of: dict[tuple[int, ...], int] = {
            e: i for i, e in enumerate(exponents)
        }
        self.degrees = np.array([sum(e) for e in exponents], dtype=np.int64)

        # Cauchy product table: all ordered index pairs whose degrees fit,
        # grouped by target index for np.add.reduceat.
        ii, jj, kk = [], [], []
        for i, ei in enumerate(exponents):
            di = self.degrees[i]
            for j, ej in enumerate(exponents):
                if di + self.degrees[j] > order:
                    continue
                ii.append(i)
                jj.append(j)
                kk.append(self.index_of[tuple(a + b for a, b in zip(ei, ej))])
        kk_arr = np.array(kk, dtype=np.int64)
        sort = np.argsort(kk_arr, kind="stable")
        self._mul_ii = np.array(ii, dtype=np.int64)[sort]
        self._mul_jj = np.array(jj, dtype=np.int64)[sort]
        kk_sorted = kk_arr[sort]
        self._mul_out, self._mul_starts = np.unique(kk_sorted, return_index=True)

        # Per-variable derivative, integration and shift tables.
        self._diff: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        self._shift: list[tuple[np.ndarray, np.ndarray]] = []
        for v in range(num_vars):
            src, dst, fac = [], [], []
            s_src, s_dst = [], []
            for i, e in enumerate(exponents):
                if e[v] > 0:
                    low = list(e)
                    low[v] -= 1
                    src.append(i)
                    dst.append(self.index_of[tuple(low)])
                    fac.append(e[v])
                if self.degrees[i] < order:
                    up = list(e)
                    up[v] += 1
                    s_src.append(i)
                    s_dst.append(self.index_of[tuple(up)])
            self._diff.append(
                (
                    np.array(src, dtype=np.int64),
                    np.array(dst, dtype=np.int64),
                    np.array(fac, dtype=np.float64),
                )
            )
            self._shift.append(
                (np.array(s_src, dtype=np.int64), np.array(s_dst, dtype=np.int64))
            )

        self._trunc_masks = [self.degrees <= d for d in range(order + 1)]

    # -- constructors -----------------------------------------------------

    def _wrap(self, coeffs: np.ndarray, eff_order: int) -> "Jet":
        eff_order = min(eff_order, self.order)
        if eff_order < self.order:
            coeffs = np.where(self._trunc_masks[max(eff_order, 0)], coeffs, 0.0)
        coeffs.setflags(write=False)
        return Jet(self, coeffs, eff_order)

    def zero(self, eff_order: int | None = None) -> "Jet":
        return self._wrap(
            np.zeros(self.size, dtype=np.complex128),
            self.order if eff_order is None else eff_order,
        )

    def constant(self, value: complex) -> "Jet":
        c = np.zeros(self.size, dtype=np.complex128)
        c[0] = value
        return self._wrap(c, self.order)

    def one(self) -> "Jet":
        return self.constant(1.0)

    def variable(self, v: int) -> "Jet":
        if not 0 <= v < self.num_vars:
            raise ShapeError(f"variable index {v} out of range for {self.num_vars} vars")
        c = np.zeros(self.size, dtype=np.complex128)
        if self.order >= 1:
            e = [0] * self.num_vars
            e[v] = 1
            c[self.index_of[tuple(e)]] = 1.0
        return self._wrap(c, self.order)

    def from_coeffs(self, coeffs: Sequence[complex], eff_order: int | None = None) -> "Jet":
        arr = np.asarray(coeffs, dtype=np.complex128)
        if arr.shape != (self.size,):
            raise ShapeError(f"expected {self.size} coefficients, got {arr.shape}")
        return self._wrap(arr.copy(), self.order if eff_order is None else eff_order)

    def from_terms(self, terms: dict[tuple[int, ...], complex]) -> "Jet":
        c = np.zeros(self.size, dtype=np.complex128)
        for exp, val in terms.items():
            exp = tuple(int(x) for x in exp)
            if len(exp) != self.num_vars:
                raise ShapeError(f"multi-index {exp} has wrong length")
            if any(x < 0 for x in exp):
                raise ShapeError(f"multi-index {exp} has negative entries")
            if sum(exp) > self.order:
                raise ShapeError(f"multi-index {exp} exceeds order {self.order}")
            c[self.index_of[exp]] += val
        return self._wrap(c, self.order)

    def variables(self) -> list["Jet"]:
        return [self.variable(v) for v in range(self.num_vars)]

    def __repr__(self):
        return f"JetSpace(num_vars={self.num_vars}, order={self.order})"


@lru_cache(maxsize=None)
def jet_space(num_vars: int, order: int) -> JetSpace:
    return JetSpace(num_vars, order)


class Jet:
    """One truncated power series; use :class:`JetSpace` methods to build."""

    __slots__ = ("space", "coeffs", "eff_order")

    def __init__(self, space: JetSpace, coeffs: np.ndarray, eff_order: int):
        self.space = space
        self.coeffs = coeffs
        self.eff_order = eff_order

    # -- helpers ----------------------------------------------------------

    def _check_compatible(self, other: "Jet") -> JetSpace:
        if self.space is not other.space:
            if (
                self.space.num_vars != other.space.num_vars
                or self.space.order != other.space.order
            ):
                raise ShapeError(
                    f"incompatible jets: {self.space} vs {other.space}; "
                    "coerce explicitly with Jet.in_space"
                )
        return self.space

    @property
    def value0(self) -> complex:
        """Constant term (the value of the germ at the base point)."""
        return complex(self.coeffs[0])

    def is_zero(self) -> bool:
        return not self.coeffs.any()

    def is_constant(self) -> bool:
        return not self.coeffs[1:].any()

    def in_space(self, space: JetSpace) -> "Jet":
        """Coerce to another order (truncation or extension by zero)."""
        if space is self.space:
            return self
        if space.num_vars != self.space.num_vars:
            raise ShapeError("cannot coerce between different variable counts")
        c = np.zeros(space.size, dtype=np.complex128)
        for i, e in enumerate(self.space.exponents):
            if self.space.degrees[i] <= space.order:
                c[space.index_of[e]] = self.coeffs[i]
        return space._wrap(c, min(self.eff_order, space.order))

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            sp = self._check_compatible(other)
            eff = min(self.eff_order, other.eff_order)
            return sp._wrap(self.coeffs + other.coeffs, eff)
        return self + self.space.constant(other)

    __radd__ = __add__

    def __neg__(self):
        return self.space._wrap(-self.coeffs, self.eff_order)

    def __sub__(self, other):
        if isinstance(other, Jet):
            sp = self._check_compatible(other)
            eff = min(self.eff_order, other.eff_order)
            return sp._wrap(self.coeffs - other.coeffs, eff)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        sp = self._check_compatible(other)
        eff = min(self.eff_order, other.eff_order)
        a, b = self.coeffs, other.coeffs
        if not a.any() or not b.any():
            return sp.zero(eff)
        if self.is_constant():
            return sp._wrap(b * a[0], eff)
        if other.is_constant():
            return sp._wrap(a * b[0], eff)
        prod = a[sp._mul_ii] * b[sp._mul_jj]
        out = np.zeros(sp.size, dtype=np.complex128)
        out[sp._mul_out] = np.add.reduceat(prod, sp._mul_starts)
        return sp._wrap(out, eff)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c: complex) -> "Jet":
        return self.space._wrap(self.coeffs * complex(c), self.eff_order)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.invert()
        return self.scale(1.0 / complex(other))

    def __pow__(self, n: int) -> "Jet":
        if n < 0:
            return self.invert() ** (-n)
        result = self.space.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # -- calculus ----------------------------------------------------------

    def partial(self, v: int) -> "Jet":
        """Formal partial derivative; lowers the effective order by one."""
        sp = self.space
        if not 0 <= v < sp.num_vars:
            raise ShapeError(f"variable index {v} out of range")
        src, dst, fac = sp._diff[v]
        out = np.zeros(sp.size, dtype=np.complex128)
        out[dst] = self.coeffs[src] * fac
        return sp._wrap(out, max(self.eff_order - 1, -1))

    def integrate(self, v: int) -> "Jet":
        """Antiderivative in variable ``v`` vanishing at the origin.

        The output is trusted one order higher than the input (capped at K);
        coefficients that would exceed the order are dropped.
        """
        sp = self.space
        src, dst, fac = sp._diff[v]
        out = np.zeros(sp.size, dtype=np.complex128)
        out[src] = self.coeffs[dst] / fac
        return sp._wrap(out, self.eff_order + 1)

    def shift(self, v: int) -> "Jet":
        """Multiply by the coordinate ``t_v`` (degree-raising shift).

        Degree-g output coefficients come from degree-(g-1) input, so the
        result is trustworthy one order beyond the input.
        """
        sp = self.space
        src, dst = sp._shift[v]
        out = np.zeros(sp.size, dtype=np.complex128)
        out[dst] = self.coeffs[src]
        return sp._wrap(out, self.eff_order + 1)

    def invert(self, tol: float = 1e-12) -> "Jet":
        """Multiplicative inverse; requires a non-vanishing constant term."""
        sp = self.space
        c0 = self.coeffs[0]
        if abs(c0) <= tol:
            raise SingularInputError(
                f"cannot invert jet with constant term {c0!r} (|c0| <= {tol})"
            )
        x = sp.constant(1.0 / c0)
        correct = 0
        while correct < sp.order:
            x = x * (2.0 - self * x)
            correct = 2 * correct + 1
        return sp._wrap(x.coeffs, min(self.eff_order, sp.order))

    def sqrt(self, branch_anchor: complex | None = None, tol: float = 1e-9) -> "Jet":
        """Square root with the branch fixed by ``branch_anchor``.

        ``branch_anchor`` must square to the constant term; by default the
        principal root (argument in (-pi/2, pi/2]) is used.
        """
        sp = self.space
        c0 = self.coeffs[0]
        if abs(c0) <= 1e-12:
            raise SingularInputError("square root of a jet with vanishing constant term")
        if branch_anchor is None:
            branch_anchor = np.sqrt(complex(c0))
        anchor = complex(branch_anchor)
        if abs(anchor * anchor - c0) > tol * max(1.0, abs(c0)):
            raise InvalidAnchorError(
                f"anchor {anchor!r} does not square to the constant term {c0!r}"
            )
        s = sp.constant(anchor)
        inv2a = 1.0 / (2.0 * anchor)
        for _ in range(sp.order):
            s = s + (self - s * s).scale(inv2a)
        return sp._wrap(s.coeffs, min(self.eff_order, sp.order))

    def compose(self, subs: Sequence["Jet"]) -> "Jet":
        """Substitute ``subs[i]`` for variable ``i`` (exact polynomial
        substitution, truncated at the target order).

        Constant terms of the substitutions are substituted exactly, so the
        composition re-centers the expansion point.
        """
        if len(subs) != self.space.num_vars:
            raise ShapeError(
                f"expected {self.space.num_vars} substitutions, got {len(subs)}"
            )
        target = subs[0].space
        for s in subs[1:]:
            if s.space is not target:
                raise ShapeError("substitution jets must share one space")
        eff = min([self.eff_order] + [s.eff_order for s in subs])
        src = self.space
        monomials: list[Jet | None] = [None] * src.size
        monomials[0] = target.one()
        out = target.zero().coeffs.copy()
        for i, e in enumerate(src.exponents):
            if i == 0:
                mono = monomials[0]
            else:
                v = next(k for k, x in enumerate(e) if x > 0)
                low = list(e)
                low[v] -= 1
                prev = monomials[src.index_of[tuple(low)]]
                mono = prev * subs[v]
                monomials[i] = mono
            c = self.coeffs[i]
            if c != 0:
                out = out + mono.coeffs * c
        return target._wrap(out, eff)

    # -- reporting ----------------------------------------------------------

    def residual_norm(self) -> float:
        """Max coefficient modulus over the trustworthy degrees."""
        if self.eff_order < 0:
            raise ValueError("jet has no trustworthy coefficients (eff_order < 0)")
        mask = self.space._trunc_masks[min(self.eff_order, self.space.order)]
        vals = np.abs(self.coeffs[mask])
        return float(vals.max()) if vals.size else 0.0

    def terms(self) -> dict[tuple[int, ...], complex]:
        return {
            e: complex(self.coeffs[i])
            for i, e in enumerate(self.space.exponents)
            if self.coeffs[i] != 0
        }

    def homogeneous_part(self, degree: int) -> np.ndarray:
        """Coefficients of total degree ``degree`` (in graded-lex order)."""
        mask = self.space.degrees == degree
        return self.coeffs[mask]

    def degree_part(self, degree: int) -> "Jet":
        """Jet keeping only the total-degree-``degree`` coefficients."""
        out = np.where(self.space.degrees == degree, self.coeffs, 0.0)
        return self.space._wrap(out, self.eff_order)

    def __repr__(self):
        body = ", ".join(
            f"{e}:{c:.4g}" for e, c in list(self.terms().items())[:6]
        )
        more = "..." if len(self.terms()) > 6 else ""
        return f"Jet({self.space.num_vars}v,K={self.space.order},eff={self.eff_order}; {body}{more})"


# -- spec-level functional surface ------------------------------------------


def jet_add(a: Jet, b: Jet) -> Jet:
    return a + b


def jet_mul(a: Jet, b: Jet) -> Jet:
    return a * b


def jet_scale(a: Jet, c: complex) -> Jet:
    return a.scale(c)


def jet_partial(a: Jet, v: int) -> Jet:
    return a.partial(v)


def jet_invert(a: Jet) -> Jet:
    return a.invert()


def jet_sqrt(a: Jet, branch_anchor: complex | None = None) -> Jet:
    return a.sqrt(branch_anchor)


def jet_compose(a: Jet, subs: Sequence[Jet]) -> Jet:
    return a.compose(subs)


def jet_residual_norm(a: Jet) -> float:
    return a.residual_norm()


# -- jet vectors -------------------------------------------------------------


class JetVector:
    """Ordered list of jets sharing one space; models a vector field in
    coordinates."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Jet]):
        comp = tuple(components)
        if not comp:
            raise ShapeError("JetVector must be non-empty")
        sp = comp[0].space
        for c in comp[1:]:
            if c.space is not sp:
                raise ShapeError("JetVector components must share one space")
        self.components = comp

    @property
    def space(self) -> JetSpace:
        return self.components[0].space

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other: "JetVector") -> "JetVector":
        return JetVector(a + b for a, b in zip(self.components, other.components))

    def __sub__(self, other: "JetVector") -> "JetVector":
        return JetVector(a - b for a, b in zip(self.components, other.components))

    def __neg__(self):
        return JetVector(-a for a in self.components)

    def scale(self, f: "Jet | complex") -> "JetVector":
        if isinstance(f, Jet):
            return JetVector(a * f for a in self.components)
        return JetVector(a.scale(f) for a in self.components)

    def apply_to(self, f: Jet) -> Jet:
        """Directional derivative X(f) = sum_i X^i d_i f."""
        out = self.components[0] * f.partial(0)
        for v in range(1, len(self.components)):
            out = out + self.components[v] * f.partial(v)
        return out

    def constant_terms(self) -> np.ndarray:
        return np.array([c.value0 for c in self.components], dtype=np.complex128)

    def residual_norm(self) -> float:
        return max(c.residual_norm() for c in self.components)

    def __repr__(self):
        return f"JetVector({list(self.components)!r})"


def lie_bracket(x: JetVector, y: JetVector) -> JetVector:
    """[X, Y]^k = X(Y^k) - Y(X^k), componentwise in jets."""
    return JetVector(
        x.apply_to(yk) - y.apply_to(xk) for xk, yk in zip(x.components, y.components)
    )


# -- jet matrices -------------------------------------------------------------


class JetMatrix:
    """Rectangular grid of jets sharing one space."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[Jet]]):
        rows = tuple(tuple(r) for r in entries)
        if not rows or not rows[0]:
            raise ShapeError("JetMatrix must be non-empty")
        ncols = len(rows[0])
        sp = rows[0][0].space
        for r in rows:
            if len(r) != ncols:
                raise ShapeError("JetMatrix rows must have equal length")
            for x in r:
                if x.space is not sp:
                    raise ShapeError("JetMatrix entries must share one space")
        self.entries = rows
        self.rows = len(rows)
        self.cols = ncols

    @property
    def space(self) -> JetSpace:
        return self.entries[0][0].space

    @classmethod
    def from_constant(cls, space: JetSpace, matrix: np.ndarray) -> "JetMatrix":
        m = np.asarray(matrix, dtype=np.complex128)
        if m.ndim != 2:
            raise ShapeError("constant matrix must be 2-dimensional")
        return cls(
            [[space.constant(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]
        )

    @classmethod
    def identity(cls, space: JetSpace, n: int) -> "JetMatrix":
        return cls.from_constant(space, np.eye(n))

    @classmethod
    def zero(cls, space: JetSpace, rows: int, cols: int, eff_order: int | None = None) -> "JetMatrix":
        return cls([[space.zero(eff_order) for _ in range(cols)] for _ in range(rows)])

    def __getitem__(self, idx):
        i, j = idx
        return self.entries[i][j]

    def __add__(self, other: "JetMatrix") -> "JetMatrix":
        self._same_shape(other)
        return JetMatrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "JetMatrix") -> "JetMatrix":
        self._same_shape(other)
        return JetMatrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self):
        return JetMatrix([[-a for a in r] for r in self.entries])

    def scale(self, f: "Jet | complex") -> "JetMatrix":
        if isinstance(f, Jet):
            return JetMatrix([[a * f for a in r] for r in self.entries])
        return JetMatrix([[a.scale(f) for a in r] for r in self.entries])

    def _same_shape(self, other: "JetMatrix"):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError(
                f"matrix shapes differ: {self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def __matmul__(self, other):
        if isinstance(other, JetMatrix):
            if self.cols != other.rows:
                raise ShapeError("inner dimensions do not match")
            return JetMatrix(
                [
                    [
                        _dot(self.entries[i], [other.entries[k][j] for k in range(other.rows)])
                        for j in range(other.cols)
                    ]
                    for i in range(self.rows)
                ]
            )
        if isinstance(other, JetVector):
            if self.cols != len(other):
                raise ShapeError("inner dimensions do not match")
            return JetVector(
                _dot(self.entries[i], other.components) for i in range(self.rows)
            )
        return NotImplemented

    def apply(self, vector: np.ndarray) -> JetVector:
        """Apply to a constant coordinate vector."""
        v = np.asarray(vector, dtype=np.complex128)
        if v.shape != (self.cols,):
            raise ShapeError("vector length does not match matrix columns")
        out = []
        for i in range(self.rows):
            acc = self.space.zero()
            for j in range(self.cols):
                if v[j] != 0:
                    acc = acc + self.entries[i][j].scale(v[j])
            out.append(acc)
        return JetVector(out)

    def transpose(self) -> "JetMatrix":
        return JetMatrix(
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)]
        )

    @property
    def T(self) -> "JetMatrix":
        return self.transpose()

    def partial(self, v: int) -> "JetMatrix":
        return JetMatrix([[a.partial(v) for a in r] for r in self.entries])

    def constant_term(self) -> np.ndarray:
        return np.array(
            [[a.value0 for a in r] for r in self.entries], dtype=np.complex128
        )

    def residual_norm(self) -> float:
        return max(a.residual_norm() for r in self.entries for a in r)

    def eff_order(self) -> int:
        return min(a.eff_order for r in self.entries for a in r)

    def trace(self) -> Jet:
        if self.rows != self.cols:
            raise ShapeError("trace requires a square matrix")
        acc = self.space.zero()
        for i in range(self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def inverse(self, cond_limit: float = 1e12) -> "JetMatrix":
        """Inverse via the constant-term inverse plus Newton iteration."""
        if self.rows != self.cols:
            raise ShapeError("inverse requires a square matrix")
        a0 = self.constant_term()
        if not np.all(np.isfinite(a0)) or np.linalg.cond(a0) > cond_limit:
            raise SingularInputError("matrix is singular at the base point")
        sp = self.space
        x = JetMatrix.from_constant(sp, np.linalg.inv(a0))
        ident = JetMatrix.identity(sp, self.rows)
        correct = 0
        while correct < sp.order:
            x = x @ (ident.scale(2.0) - self @ x)
            correct = 2 * correct + 1
        eff = self.eff_order()
        return JetMatrix([[e.space._wrap(e.coeffs.copy(), eff) for e in r] for r in x.entries])

    def power(self, n: int) -> "JetMatrix":
        if n < 0:
            raise ShapeError("negative matrix powers are not supported")
        result = JetMatrix.identity(self.space, self.rows)
        base = self
        for _ in range(n):
            result = result @ base
        return result

    def compose(self, subs: Sequence[Jet]) -> "JetMatrix":
        return JetMatrix([[a.compose(subs) for a in r] for r in self.entries])

    def __repr__(self):
        return f"JetMatrix({self.rows}x{self.cols}, K={self.space.order})"


def _dot(row: Sequence[Jet], col: Sequence[Jet]) -> Jet:
    acc = row[0] * col[0]
    for a, b in zip(row[1:], col[1:]):
        acc = acc + a * b
    return acc


def commutator(a: JetMatrix, b: JetMatrix) -> JetMatrix:
    return a @ b - b @ a
