"""
Bilinear pairings and forms: perpendicular complements, closures and the
isotropic / coisotropic / maximal-isotropic classification.

Named forms use signed basis labels.  Coordinates are ordered by label,
ascending: e_{-n}, ..., e_{-1}, [e_0], e_1, ..., e_n.  The conventions are

* ``split_symmetric``:  <e_i, e_{-i}> = 1, and <e_0, e_0> = 1 in odd dimension;
* ``split_symplectic``: <e_i, e_{-i}> = 1 for i > 0 and -1 for i < 0;
* ``standard_dual``:    <x_i, x_j^*> = delta_ij with labels 1..n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import InputError, PreconditionError
from .exact_linalg import (
    Subspace,
    Vector,
    _kernel_subspace,
    as_vector,
    complement_basis,
    format_rational,
    intersect,
    parse_rational,
    span,
    subspace_sum,
)

KINDS = ("explicit", "standard_dual", "split_symmetric", "split_symplectic")


def signed_labels(dim: int) -> tuple:
    n = dim // 2
    mid = (0,) if dim % 2 else ()
    return tuple(range(-n, 0)) + mid + tuple(range(1, n + 1))


@dataclass(frozen=True)
class Pairing:
    kind: str
    left_dim: int
    right_dim: int
    gram: tuple
    labels: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown pairing kind {self.kind!r}", field="kind")
        if len(self.gram) != self.left_dim or any(len(r) != self.right_dim for r in self.gram):
            raise InputError("gram matrix has the wrong shape", field="gram")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.left_dim + 1)))

    @property
    def is_form(self) -> bool:
        return self.left_dim == self.right_dim

    @property
    def is_symmetric(self) -> bool:
        g = self.gram
        return self.is_form and all(
            g[i][j] == g[j][i] for i in range(self.left_dim) for j in range(i)
        )

    @property
    def is_antisymmetric(self) -> bool:
        g = self.gram
        return self.is_form and all(
            g[i][j] == -g[j][i] for i in range(self.left_dim) for j in range(i + 1)
        )

    def index(self, label: int) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"no basis vector labelled {label}") from None

    def e(self, label: int) -> Vector:
        """Basis vector with the given label (on the left side)."""
        i = self.index(label)
        return tuple(Fraction(int(j == i)) for j in range(self.left_dim))

    def vec(self, coeffs: Mapping[int, object]) -> Vector:
        """Vector from a {label: coefficient} mapping."""
        v = [Fraction(0)] * self.left_dim
        for lab, c in coeffs.items():
            v[self.index(lab)] += parse_rational(c)
        return tuple(v)

    def lines(self, *labels: int) -> Subspace:
        return span([self.e(l) for l in labels], self.left_dim)

    def value(self, x: Sequence, y: Sequence) -> Fraction:
        g = self.gram
        total = Fraction(0)
        for i, a in enumerate(x):
            if a:
                row = g[i]
                for j, b in enumerate(y):
                    if b and row[j]:
                        total += a * row[j] * b
        return total

    def to_json(self) -> dict:
        if self.kind == "explicit":
            return {"kind": "explicit", "gram": [[format_rational(c) for c in r] for r in self.gram]}
        doc = {"kind": self.kind, "dim": self.left_dim}
        if self.kind == "standard_dual" and self.labels != tuple(range(1, self.left_dim + 1)):
            doc["labels"] = list(self.labels)
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "Pairing":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise InputError("pairing document needs a 'kind'", field="kind")
        kind = doc["kind"]
        if kind == "explicit":
            if "gram" not in doc:
                raise InputError("explicit pairing needs 'gram'", field="gram")
            return explicit(doc["gram"])
        if "dim" not in doc:
            raise InputError(f"{kind} pairing needs 'dim'", field="dim")
        try:
            dim = int(doc["dim"])
        except (TypeError, ValueError):
            raise InputError("dim must be an integer", field="dim") from None
        builders = {
            "standard_dual": standard_dual,
            "split_symmetric": split_symmetric,
            "split_symplectic": split_symplectic,
        }
        if kind not in builders:
            raise InputError(f"unknown pairing kind {kind!r}", field="kind")
        if kind == "standard_dual" and doc.get("labels"):
            labels = doc["labels"]
            if not isinstance(labels, list) or len(labels) != dim or len(set(labels)) != dim:
                raise InputError("labels must list dim distinct integers", field="labels")
            return standard_dual(dim, [int(l) for l in labels])
        return builders[kind](dim)


def _identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def explicit(gram: Sequence[Sequence], labels: Sequence[int] = ()) -> Pairing:
    rows = tuple(as_vector(r) for r in gram)
    if not rows or not rows[0]:
        raise InputError("gram matrix is empty", field="gram")
    return Pairing("explicit", len(rows), len(rows[0]), rows, tuple(labels))


def standard_dual(n: int, labels: Sequence[int] = ()) -> Pairing:
    if n <= 0:
        raise InputError("dimension must be positive", field="dim")
    return Pairing("standard_dual", n, n, _identity(n), tuple(labels))


def split_symmetric(dim: int) -> Pairing:
    if dim <= 0:
        raise InputError("dimension must be positive", field="dim")
    labels = signed_labels(dim)
    pos = {l: i for i, l in enumerate(labels)}
    g = [[Fraction(0)] * dim for _ in range(dim)]
    for l in labels:
        g[pos[l]][pos[-l]] = Fraction(1)
    return Pairing("split_symmetric", dim, dim, tuple(map(tuple, g)), labels)


def split_symplectic(dim: int) -> Pairing:
    if dim <= 0 or dim % 2:
        raise InputError("symplectic dimension must be positive and even", field="dim")
    labels = signed_labels(dim)
    pos = {l: i for i, l in enumerate(labels)}
    g = [[Fraction(0)] * dim for _ in range(dim)]
    for l in labels:
        g[pos[l]][pos[-l]] = Fraction(1 if l > 0 else -1)
    return Pairing("split_symplectic", dim, dim, tuple(map(tuple, g)), labels)


def _side_dim(P: Pairing, side: str) -> int:
    if side == "left":
        return P.left_dim
    if side == "right":
        return P.right_dim
    raise InputError(f"side must be 'left' or 'right', got {side!r}", field="side")


def perp(S: Subspace, P: Pairing, side: str = "left") -> Subspace:
    """Perpendicular of S on the opposite side of P."""
    n = _side_dim(P, side)
    if S.ambient_dim != n:
        raise InputError(f"subspace lives in dim {S.ambient_dim}, {side} side has dim {n}")
    g = P.gram
    if side == "left":
        m = P.right_dim
        rows = [
            tuple(sum((s[i] * g[i][j] for i in range(n) if s[i]), Fraction(0)) for j in range(m))
            for s in S.basis
        ]
    else:
        m = P.left_dim
        rows = [
            tuple(sum((g[i][j] * s[j] for j in range(n) if s[j]), Fraction(0)) for i in range(m))
            for s in S.basis
        ]
    return _kernel_subspace(rows, m)


def _other(side: str) -> str:
    return "right" if side == "left" else "left"


def closure(S: Subspace, P: Pairing, side: str = "left") -> Subspace:
    return perp(perp(S, P, side), P, _other(side))


def is_closed(S: Subspace, P: Pairing, side: str = "left") -> bool:
    return closure(S, P, side) == S


@dataclass(frozen=True)
class IsotropyReport:
    is_closed: bool
    is_isotropic: bool
    is_coisotropic: bool
    is_maximal_isotropic: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _require_form(P: Pairing, what: str):
    if not P.is_form:
        raise InputError(f"{what} needs a form (left_dim == right_dim)", field="pairing")


def classify(S: Subspace, P: Pairing) -> IsotropyReport:
    """Closedness and isotropy data of S.

    Maximal isotropy follows the two characterisations for nondegenerate
    forms: symmetric -- closed, isotropic and dim S^perp/S <= 1;
    antisymmetric -- S equal to its perp.  Other forms report False.
    """
    _require_form(P, "classify")
    sp = perp(S, P)
    closed = perp(sp, P, "right") == S
    iso = S <= sp
    coiso = sp <= S
    if P.is_antisymmetric:
        maximal = sp == S
    elif P.is_symmetric:
        maximal = closed and iso and sp.dim - S.dim <= 1
    else:
        maximal = False
    return IsotropyReport(closed, iso, coiso, maximal)


def is_isotropic(S: Subspace, P: Pairing) -> bool:
    _require_form(P, "isotropy")
    return S <= perp(S, P)


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = math.isqrt(a), math.isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def maximal_isotropic_extensions(L: Subspace, P: Pairing) -> set:
    """The two maximal isotropic subspaces containing L, for a symmetric P.

    L must be closed and isotropic with dim L^perp/L = 2.  The isotropic
    lines of the induced rank-2 form on L^perp/L must be rational.
    """
    if not P.is_symmetric:
        raise PreconditionError("pairing is not a symmetric form", condition="symmetric")
    Lp = perp(L, P)
    if perp(Lp, P, "right") != L:
        raise PreconditionError("L is not closed", condition="closed")
    if not L <= Lp:
        raise PreconditionError("L is not isotropic", condition="isotropic")
    if Lp.dim - L.dim != 2:
        raise PreconditionError(
            f"dim L^perp/L = {Lp.dim - L.dim}, expected 2", condition="codim2"
        )
    u, w = complement_basis(L, Lp)
    quu, quw, qww = P.value(u, u), P.value(u, w), P.value(w, w)
    disc = quw * quw - quu * qww
    if disc == 0:
        raise PreconditionError("induced form on L^perp/L is degenerate", condition="nondegenerate")
    if quu == 0:
        coeffs = [(Fraction(1), Fraction(0)), (qww, -2 * quw)]
    else:
        root = _rational_sqrt(disc)
        if root is None:
            raise PreconditionError(
                "isotropic lines of L^perp/L are not defined over Q", condition="rational"
            )
        coeffs = [((-quw + root) / quu, Fraction(1)), ((-quw - root) / quu, Fraction(1))]
    out = set()
    for a, b in coeffs:
        v = tuple(a * x + b * y for x, y in zip(u, w))
        out.add(subspace_sum(L, span([v], L.ambient_dim)))
    return out


def induced_form(S: Subspace, P: Pairing) -> list[list[Fraction]]:
    """Gram matrix of P restricted to the RREF basis of S."""
    return [[P.value(a, b) for b in S.basis] for a in S.basis]


__all__ = [
    "IsotropyReport",
    "Pairing",
    "classify",
    "closure",
    "explicit",
    "induced_form",
    "intersect",
    "is_closed",
    "is_isotropic",
    "maximal_isotropic_extensions",
    "perp",
    "signed_labels",
    "split_symmetric",
    "split_symplectic",
    "standard_dual",
]
