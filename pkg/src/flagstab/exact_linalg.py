"""
Exact linear algebra over the rationals.

Subspaces of a coordinate space Q^n are stored by their reduced row-echelon
basis, so two subspaces are equal exactly when their basis tuples are equal.
Internally, elimination runs on sparse rows (``dict`` column -> rational,
using gmpy2's mpq when available); the public surface uses dense tuples of
``Fraction``.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InputError

try:  # exact rationals with a C backend; same values, ~10x faster in hot loops
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

Vector = tuple  # tuple of Fraction
Sparse = dict  # column -> nonzero Fraction

__all__ = [
    "Echelon",
    "Subspace",
    "as_vector",
    "kernel",
    "member",
    "intersect",
    "parse_rational",
    "format_rational",
    "rank",
    "solve",
    "span",
    "subspace_sum",
]


def parse_rational(value) -> Fraction:
    """Accept ints, Fractions and "p/q" strings; reject floats outright."""
    if isinstance(value, bool):
        raise InputError(f"not a rational: {value!r}")
    if isinstance(value, numbers.Rational):
        return to_fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational: {value!r}") from exc
    raise InputError(f"not a rational (floats are rejected): {value!r}")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def as_vector(coords: Iterable, n: int | None = None) -> Vector:
    v = tuple(parse_rational(c) for c in coords)
    if n is not None and len(v) != n:
        raise InputError(f"vector has length {len(v)}, expected {n}")
    return v


def to_fraction(c) -> Fraction:
    """Plain Fraction (int numerator/denominator) from any exact rational."""
    if type(c) is Fraction or type(c) is int:
        return Fraction(c)
    return Fraction(int(c.numerator), int(c.denominator))


def to_sparse(v: Sequence) -> Sparse:
    return {i: Q(c) for i, c in enumerate(v) if c}


def to_dense(v: Mapping, n: int) -> Vector:
    out = [Fraction(0)] * n
    for i, c in v.items():
        out[i] = to_fraction(c)
    return tuple(out)


class Echelon:
    """Reduced row-echelon basis grown one vector at a time.

    Every stored row has a 1 at its pivot and zeros at every other pivot, so
    reducing a vector is a single pass over the pivots it touches.
    """

    __slots__ = ("ncols", "rows")

    def __init__(self, ncols: int, vectors: Iterable = ()):
        self.ncols = ncols
        self.rows: dict[int, Sparse] = {}
        for v in vectors:
            self.add(v)

    def __len__(self):
        return len(self.rows)

    def copy(self) -> "Echelon":
        e = Echelon(self.ncols)
        e.rows = {p: dict(r) for p, r in self.rows.items()}
        return e

    def reduce(self, v) -> Sparse:
        if not isinstance(v, dict):
            v = to_sparse(v)
        else:
            v = {k: Q(c) for k, c in v.items() if c}
        rows = self.rows
        for p in [p for p in v if p in rows]:
            c = v.get(p)
            if not c:
                continue
            for k, x in rows[p].items():
                y = v.get(k, 0) - c * x
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
        return v

    def contains(self, v) -> bool:
        return not self.reduce(v)

    def add(self, v) -> bool:
        """Insert ``v``; return False when it is already in the span."""
        r = self.reduce(v)
        if not r:
            return False
        p = min(r)
        lead = r[p]
        if lead != 1:
            r = {k: c / lead for k, c in r.items()}
        for row in self.rows.values():
            c = row.get(p)
            if c:
                for k, x in r.items():
                    y = row.get(k, 0) - c * x
                    if y:
                        row[k] = y
                    else:
                        row.pop(k, None)
        self.rows[p] = r
        return True

    def pivots(self) -> list[int]:
        return sorted(self.rows)

    def sparse_rows(self) -> list[Sparse]:
        return [self.rows[p] for p in sorted(self.rows)]

    def subspace(self) -> "Subspace":
        n = self.ncols
        basis = tuple(to_dense(self.rows[p], n) for p in sorted(self.rows))
        return Subspace._trusted(n, basis)


@dataclass(frozen=True)
class Subspace:
    """A subspace of Q^ambient_dim held in canonical RREF.

    Use :func:`span` or :meth:`from_rref` to build one; the constructor does
    not re-derive the canonical form.
    """

    ambient_dim: int
    basis: tuple

    @classmethod
    def _trusted(cls, n: int, basis: tuple) -> "Subspace":
        return cls(n, basis)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)))

    @classmethod
    def from_rref(cls, n: int, rows: Sequence[Sequence]) -> "Subspace":
        """Validate that ``rows`` already is a canonical RREF basis."""
        basis = tuple(as_vector(r, n) for r in rows)
        last = -1
        pivots = []
        for r in basis:
            nz = [i for i, c in enumerate(r) if c]
            if not nz:
                raise InputError("basis row is zero", field="basis")
            p = nz[0]
            if p <= last or r[p] != 1:
                raise InputError("basis is not in reduced row-echelon form", field="basis")
            last = p
            pivots.append(p)
        for p in pivots:
            if sum(1 for r in basis if r[p]) != 1:
                raise InputError("pivot column is not otherwise zero", field="basis")
        return cls(n, basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple:
        return tuple(next(i for i, c in enumerate(r) if c) for r in self.basis)

    def echelon(self) -> Echelon:
        e = Echelon(self.ambient_dim)
        for r in self.basis:
            p = next(i for i, c in enumerate(r) if c)
            e.rows[p] = to_sparse(r)
        return e

    def __contains__(self, v) -> bool:
        return member(v, self)

    def __le__(self, other: "Subspace") -> bool:
        _check_same(self, other)
        e = other.echelon()
        return all(e.contains(r) for r in self.basis)

    def __lt__(self, other: "Subspace") -> bool:
        return self.dim < other.dim and self <= other

    def is_zero(self) -> bool:
        return not self.basis

    def is_full(self) -> bool:
        return self.dim == self.ambient_dim

    def to_json(self) -> dict:
        return {
            "ambient_dim": self.ambient_dim,
            "basis": [[format_rational(c) for c in r] for r in self.basis],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "Subspace":
        try:
            n = int(doc["ambient_dim"])
            rows = doc["basis"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad subspace document: {exc}", field="subspace") from exc
        if n <= 0:
            raise InputError("ambient_dim must be positive", field="ambient_dim")
        return cls.from_rref(n, rows)

    def __repr__(self):
        rows = ", ".join("(" + ",".join(format_rational(c) for c in r) + ")" for r in self.basis)
        return f"Subspace({self.ambient_dim}, [{rows}])"


def _check_same(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise InputError(f"ambient mismatch: {a.ambient_dim} vs {b.ambient_dim}")


def span(generators: Iterable, ambient_dim: int) -> Subspace:
    e = Echelon(ambient_dim)
    for g in generators:
        if isinstance(g, dict):
            e.add(g)
            continue
        g = as_vector(g)
        if len(g) != ambient_dim:
            raise InputError(f"generator has length {len(g)}, expected {ambient_dim}")
        e.add(g)
    return e.subspace()


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    _check_same(a, b)
    e = a.echelon()
    for r in b.basis:
        e.add(r)
    return e.subspace()


def annihilator_rows(a: Subspace) -> list[Sparse]:
    """Sparse rows y with y.x = 0 exactly for x in ``a`` (dot product)."""
    return kernel_sparse(a.echelon().sparse_rows(), a.ambient_dim)


def intersect(a: Subspace, b: Subspace) -> Subspace:
    _check_same(a, b)
    if a.is_full():
        return b
    if b.is_full():
        return a
    rows = annihilator_rows(a) + annihilator_rows(b)
    return _kernel_subspace(rows, a.ambient_dim)


def member(v, a: Subspace) -> bool:
    v = as_vector(v)
    if len(v) != a.ambient_dim:
        raise InputError(f"vector has length {len(v)}, ambient is {a.ambient_dim}")
    return a.echelon().contains(v)


def kernel_sparse(rows: Iterable, ncols: int) -> list[Sparse]:
    """Null space basis (not canonicalised) of the matrix with these rows."""
    e = Echelon(ncols)
    for r in rows:
        e.add(r)
        if len(e) == ncols:
            return []
    pivots = e.rows
    out = []
    for f in range(ncols):
        if f in pivots:
            continue
        v = {f: Q(1)}
        for p, row in pivots.items():
            c = row.get(f)
            if c:
                v[p] = -c
        out.append(v)
    return out


def _kernel_subspace(rows, ncols) -> Subspace:
    return Echelon(ncols, kernel_sparse(rows, ncols)).subspace()


def kernel(matrix: Sequence[Sequence], ncols: int | None = None) -> Subspace:
    """Null space {x : M x = 0}; ``ncols`` is required when M has no rows."""
    rows = [as_vector(r) for r in matrix]
    if ncols is None:
        if not rows:
            raise InputError("kernel of an empty matrix needs ncols")
        ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise InputError("ragged matrix")
    return _kernel_subspace(rows, ncols)


def rank(matrix: Sequence[Sequence]) -> int:
    rows = list(matrix)
    if not rows:
        return 0
    return len(Echelon(len(rows[0]), rows))


def solve(columns: Sequence, target, ncoords: int) -> list[Fraction] | None:
    """Coefficients c with sum c_j * columns[j] == target, or None.

    Free coefficients are set to zero, which makes the answer canonical.
    """
    m = len(columns)
    cols = [c if isinstance(c, dict) else to_sparse(c) for c in columns]
    t = target if isinstance(target, dict) else to_sparse(target)
    # augmented system: one row per coordinate, unknowns 0..m-1, rhs at column m
    rows = []
    for i in range(ncoords):
        row = {j: col[i] for j, col in enumerate(cols) if i in col}
        if i in t:
            row[m] = -t[i]
        if row:
            rows.append(row)
    e = Echelon(m + 1, rows)
    if m in e.rows:
        return None
    sol = [Fraction(0)] * m
    for p, row in e.rows.items():
        sol[p] = -to_fraction(row.get(m, 0))
    return sol


def complement_basis(sub: Subspace, whole: Subspace) -> list[Vector]:
    """Rows of ``whole``'s RREF basis that extend ``sub``'s basis to ``whole``."""
    e = sub.echelon()
    out = []
    for r in whole.basis:
        if e.add(r):
            out.append(r)
    return out


def coordinates(v, basis: Sequence[Vector]) -> list[Fraction]:
    n = len(basis[0]) if basis else len(v)
    c = solve(list(basis), v, n)
    if c is None:
        raise InputError("vector is not in the span of the basis")
    return c
