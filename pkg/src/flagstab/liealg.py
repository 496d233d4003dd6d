"""
Matrix Lie algebras over Q acting on a coordinate space with a pairing.

Matrices are n x n and live in the flattened n^2 coordinate space; entry
(i, j) is coordinate i*n + j.  Internally matrices are sparse dicts keyed by
that flattened index; public functions accept and return dense row tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import sympy

from .errors import InputError, InvariantError, PreconditionError
from .flagkit import Chain, GeneralizedFlag
from .exact_linalg import (
    Echelon,
    Q,
    Subspace,
    _kernel_subspace,
    annihilator_rows,
    as_vector,
    complement_basis,
    format_rational,
    intersect,
    kernel_sparse,
    solve,
    span,
    subspace_sum,
    to_dense,
    to_fraction,
    to_sparse,
)
from .pairing import Pairing, classify, is_isotropic, perp, standard_dual

KINDS = ("gl", "sl", "so", "sp", "extension")

SIGN_CONVENTIONS = {
    "standard_dual": "<x_i, x_j^*> = delta_ij",
    "split_symmetric": "<e_i, e_-i> = 1; <e_0, e_0> = 1 in odd dimension",
    "split_symplectic": "<e_i, e_-i> = 1 for i > 0, -1 for i < 0",
    "explicit": "gram matrix as given",
}


# -- matrix plumbing -----------------------------------------------------------


def matrix(rows: Sequence[Sequence]) -> tuple:
    """Validate and normalise a square rational matrix."""
    out = tuple(as_vector(r) for r in rows)
    if not out or any(len(r) != len(out) for r in out):
        raise InputError("matrix must be square and nonempty", field="matrix")
    return out


def flatten(M: Sequence[Sequence]) -> tuple:
    return tuple(c for row in M for c in row)


def unflatten(v: Sequence, n: int) -> tuple:
    return tuple(tuple(v[i * n:(i + 1) * n]) for i in range(n))


def _sp(M, n: int) -> dict:
    """Sparse flattened form of a dense matrix, a flat vector or a sparse dict."""
    if isinstance(M, dict):
        return M
    if M and not isinstance(M[0], (tuple, list)):
        return to_sparse(M)
    return {i * n + j: Q(c) for i, row in enumerate(M) for j, c in enumerate(row) if c}


def _dense(a: dict, n: int) -> tuple:
    return unflatten(to_dense(a, n * n), n)


def _mul(a: dict, b: dict, n: int) -> dict:
    brows: dict = {}
    for k, w in b.items():
        brows.setdefault(k // n, []).append((k % n, w))
    out: dict = {}
    for k, v in a.items():
        i, m = divmod(k, n)
        base = i * n
        for j, w in brows.get(m, ()):
            key = base + j
            out[key] = out.get(key, 0) + v * w
    return {k: c for k, c in out.items() if c}


def _bracket(a: dict, b: dict, n: int) -> dict:
    out = _mul(a, b, n)
    for k, c in _mul(b, a, n).items():
        y = out.get(k, 0) - c
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def _trace_product(a: dict, b: dict, n: int):
    total = Q(0)
    for k, v in a.items():
        i, m = divmod(k, n)
        w = b.get(m * n + i)
        if w:
            total += v * w
    return total


def _apply(a: dict, u: Sequence, n: int) -> tuple:
    out = [Q(0)] * n
    for k, v in a.items():
        i, j = divmod(k, n)
        if u[j]:
            out[i] += v * u[j]
    return tuple(to_fraction(c) for c in out)


def bracket(X: Sequence[Sequence], Y: Sequence[Sequence]) -> tuple:
    X, Y = matrix(X), matrix(Y)
    n = len(X)
    if len(Y) != n:
        raise InputError("bracket of matrices of different sizes")
    return _dense(_bracket(_sp(X, n), _sp(Y, n), n), n)


def matmul(X: Sequence[Sequence], Y: Sequence[Sequence]) -> tuple:
    n = len(X)
    return _dense(_mul(_sp(matrix(X), n), _sp(matrix(Y), n), n), n)


def apply(Z: Sequence[Sequence], u: Sequence) -> tuple:
    Z = matrix(Z)
    n = len(Z)
    return _apply(_sp(Z, n), as_vector(u, n), n)


def unit(n: int, i: int, j: int, c=1) -> tuple:
    """Matrix with a single entry c at (i, j) (0-based coordinates)."""
    return _dense({i * n + j: Q(c)}, n)


def matrix_to_json(M: Sequence[Sequence]) -> list:
    return [[format_rational(c) for c in row] for row in M]


# -- ambients ------------------------------------------------------------------


@dataclass(frozen=True)
class Ambient:
    """A matrix Lie algebra acting on the left space of ``form``.

    ``window`` optionally restricts gl/sl to matrices whose rows and columns
    are supported on the listed basis labels (a lower level embedded in a
    higher one).
    """

    kind: str
    n: int
    form: Pairing
    space: Subspace
    base: "Ambient | None" = None
    extra: tuple = ()
    window: tuple = ()

    @property
    def dim(self) -> int:
        return self.space.dim

    @cached_property
    def basis_sparse(self) -> list:
        return [to_sparse(r) for r in self.space.basis]

    @property
    def basis(self) -> list:
        return [unflatten(r, self.n) for r in self.space.basis]

    @property
    def classical_kind(self) -> str:
        return self.base.classical_kind if self.kind == "extension" else self.kind

    def contains(self, M) -> bool:
        return self.space.echelon().contains(_sp(M, self.n))

    def to_json(self) -> dict:
        doc = {
            "kind": self.kind,
            "n": self.n,
            "form": self.form.to_json(),
            "conventions": SIGN_CONVENTIONS[self.form.kind],
            "dim": self.dim,
        }
        if self.window:
            doc["window"] = list(self.window)
        if self.kind == "extension":
            doc["base"] = self.base.to_json()
            doc["extra"] = [matrix_to_json(M) for M in self.extra]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "Ambient":
        if not isinstance(doc, Mapping) or "kind" not in doc:
            raise InputError("ambient document needs a 'kind'", field="kind")
        kind = doc["kind"]
        if kind == "extension":
            if "base" not in doc or "extra" not in doc:
                raise InputError("extension ambient needs 'base' and 'extra'", field="base")
            return extend_ambient(cls.from_json(doc["base"]), doc["extra"])
        if "form" in doc:
            arg = Pairing.from_json(doc["form"])
        elif "n" in doc:
            arg = doc["n"]
        else:
            raise InputError("ambient needs 'form' or 'n'", field="form")
        window = doc.get("window") or None
        return make_ambient(kind, arg, window=window)


def _form_constraints(G, n) -> list:
    """Rows expressing Z^T G + G Z = 0 (one per unordered index pair)."""
    rows = []
    for a in range(n):
        for b in range(a, n):
            row: dict = {}
            for k in range(n):
                # (Z^T G)_{ab} = sum_k Z_{ka} G_{kb};  (G Z)_{ab} = sum_k G_{ak} Z_{kb}
                if G[k][b]:
                    key = k * n + a
                    row[key] = row.get(key, 0) + G[k][b]
                if G[a][k]:
                    key = k * n + b
                    row[key] = row.get(key, 0) + G[a][k]
            row = {k: c for k, c in row.items() if c}
            if row:
                rows.append(row)
    return rows


def make_ambient(kind: str, n_or_form, window: Sequence[int] | None = None) -> Ambient:
    if kind not in ("gl", "sl", "so", "sp"):
        raise InputError(f"unknown ambient kind {kind!r}", field="kind")
    if isinstance(n_or_form, Pairing):
        P = n_or_form
    else:
        try:
            size = int(n_or_form)
        except (TypeError, ValueError):
            raise InputError("ambient size must be an integer or a pairing", field="n") from None
        if kind in ("so", "sp"):
            raise InputError(f"{kind} needs a form, not a size", field="form")
        P = standard_dual(size)
    n = P.left_dim
    if kind in ("gl", "sl"):
        if P.right_dim != n:
            raise InputError("gl/sl ambient needs a square pairing", field="form")
        rows: list = []
    else:
        if not P.is_form:
            raise InputError(f"{kind} needs a form", field="form")
        if kind == "so" and not P.is_symmetric:
            raise InputError("so needs a symmetric form", field="form")
        if kind == "sp" and not P.is_antisymmetric:
            raise InputError("sp needs an antisymmetric form", field="form")
        rows = _form_constraints(P.gram, n)
    if kind == "sl":
        rows.append({i * n + i: Fraction(1) for i in range(n)})
    win: tuple = ()
    if window:
        if kind not in ("gl", "sl"):
            raise InputError("windows are only supported for gl/sl", field="window")
        win = tuple(sorted(set(int(l) for l in window)))
        inside = {P.index(l) for l in win}
        for i in range(n):
            for j in range(n):
                if i not in inside or j not in inside:
                    rows.append({i * n + j: Fraction(1)})
    space = _kernel_subspace(rows, n * n)
    return Ambient(kind, n, P, space, window=win)


def _check_closed(space: Subspace, elems: list, n: int, extra_idx: Iterable[int]):
    e = space.echelon()
    for i in extra_idx:
        for j, y in enumerate(elems):
            if not e.contains(_bracket(elems[i], y, n)):
                raise InputError(
                    f"bracket of extra element {i} with basis element {j} leaves the extension",
                    field="extra",
                )


def extend_ambient(base: Ambient, extra: Sequence) -> Ambient:
    n = base.n
    mats = [matrix(M) for M in extra]
    if any(len(M) != n for M in mats):
        raise InputError("extra matrices have the wrong size", field="extra")
    sp_extra = [_sp(M, n) for M in mats]
    e = base.space.echelon()
    for v in sp_extra:
        e.add(v)
    space = e.subspace()
    elems = sp_extra + base.basis_sparse
    _check_closed(space, elems, n, range(len(sp_extra)))
    return Ambient("extension", n, base.form, space, base=base, extra=tuple(mats))


# -- tensors -------------------------------------------------------------------


def _otimes(v, w, P: Pairing) -> dict:
    """u -> <u, w> v, i.e. the matrix v (G w)^T."""
    n = P.left_dim
    g = P.gram
    gw = [sum((g[j][k] * w[k] for k in range(P.right_dim) if w[k]), Fraction(0)) for j in range(n)]
    out = {}
    for i, a in enumerate(v):
        if a:
            for j, b in enumerate(gw):
                if b:
                    out[i * n + j] = Q(a * b)
    return out


def _combine(a: dict, b: dict, sign: int) -> dict:
    out = dict(a)
    for k, c in b.items():
        y = out.get(k, 0) + sign * c
        if y:
            out[k] = y
        else:
            out.pop(k, None)
    return out


def _embed(kind: str, v, w, P: Pairing) -> dict:
    if kind == "otimes":
        return _otimes(v, w, P)
    if not P.is_form:
        raise InputError(f"{kind} needs a form", field="pairing")
    if kind == "wedge":
        return _combine(_otimes(v, w, P), _otimes(w, v, P), -1)
    if kind == "amp":
        return _combine(_otimes(v, w, P), _otimes(w, v, P), 1)
    raise InputError(f"unknown tensor kind {kind!r}", field="kind")


def embed_tensor(kind: str, v: Sequence, w: Sequence, P: Pairing) -> tuple:
    v = as_vector(v, P.left_dim)
    w = as_vector(w, P.right_dim)
    return _dense(_embed(kind, v, w, P), P.left_dim)


_TENSOR_FOR = {"gl": "otimes", "sl": "otimes", "so": "wedge", "sp": "amp"}


def _tensor_span(kind: str, pairs, P: Pairing) -> Echelon:
    n = P.left_dim
    e = Echelon(n * n)
    for X, Y in pairs:
        for x in X.basis:
            for y in Y.basis:
                e.add(_embed(kind, x, y, P))
    return e


# -- subalgebras ---------------------------------------------------------------


@dataclass(frozen=True)
class LieSubalgebra:
    ambient: Ambient
    space: Subspace

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def dim(self) -> int:
        return self.space.dim

    @cached_property
    def basis_sparse(self) -> list:
        return [to_sparse(r) for r in self.space.basis]

    @property
    def basis(self) -> list:
        return [unflatten(r, self.n) for r in self.space.basis]

    def __contains__(self, M) -> bool:
        return self.space.echelon().contains(_sp(M, self.n))

    def __le__(self, other: "LieSubalgebra") -> bool:
        return self.space <= other.space

    @cached_property
    def derived_series(self) -> tuple:
        out = [self]
        while out[-1].dim:
            nxt = _derived(out[-1])
            if nxt.space == out[-1].space:
                break
            out.append(nxt)
        return tuple(out)

    def to_json(self) -> dict:
        return {"ambient": self.ambient.to_json(), "basis": [matrix_to_json(M) for M in self.basis]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "LieSubalgebra":
        try:
            A = Ambient.from_json(doc["ambient"])
            mats = [matrix(M) for M in doc["basis"]]
        except (KeyError, TypeError) as exc:
            raise InputError(f"bad subalgebra document: {exc}", field="subalgebra") from exc
        return subalgebra(A, mats)


def subalgebra(A: Ambient, mats: Sequence, check: bool = True) -> LieSubalgebra:
    """The span of ``mats`` as a subalgebra of A (bracket closure verified)."""
    n = A.n
    sps = [_sp(M, n) for M in mats]
    space = span(sps, n * n)
    g = LieSubalgebra(A, space)
    if check:
        _require_inside(g.basis_sparse, A)
        e = space.echelon()
        bs = g.basis_sparse
        for i in range(len(bs)):
            for j in range(i + 1, len(bs)):
                if not e.contains(_bracket(bs[i], bs[j], n)):
                    raise InputError("span is not closed under the bracket", field="basis")
    return g


def _require_inside(elems, A: Ambient):
    e = A.space.echelon()
    for k, v in enumerate(elems):
        if not e.contains(v):
            raise InputError(f"element {k} lies outside the ambient", field="gens")


def _from_echelon(A: Ambient, e: Echelon) -> LieSubalgebra:
    return LieSubalgebra(A, e.subspace())


def full_subalgebra(A: Ambient) -> LieSubalgebra:
    return LieSubalgebra(A, A.space)


def _derived(g: LieSubalgebra) -> LieSubalgebra:
    n = g.n
    bs = g.basis_sparse
    e = Echelon(n * n)
    for i in range(len(bs)):
        for j in range(i + 1, len(bs)):
            e.add(_bracket(bs[i], bs[j], n))
    return _from_echelon(g.ambient, e)


def derived_series(g: LieSubalgebra) -> list[LieSubalgebra]:
    """g, [g,g], ... ending at the first repeated term (or at 0)."""
    return list(g.derived_series)


def is_solvable(g: LieSubalgebra) -> bool:
    return derived_series(g)[-1].dim == 0


def generated_subalgebra(gens: Sequence, A: Ambient) -> LieSubalgebra:
    n = A.n
    sps = [_sp(M, n) for M in gens]
    _require_inside(sps, A)
    e, _ = _saturate(sps, n)
    return _from_echelon(A, e)


def _saturate(gens: list, n: int, cartan_probe: bool = False):
    """Close ``gens`` under brackets.

    With ``cartan_probe`` the loop stops as soon as some element z of the
    span and some computed bracket y have tr(z y) != 0; by Cartan's
    criterion the generated algebra is then not solvable.  Returns the
    echelon of the span (partial on early exit) and whether it exited early.
    """
    e = Echelon(n * n)
    elems: list = []
    derived: list = []
    for g in gens:
        if e.add(g):
            elems.append(g)
    done = 0
    while done < len(elems):
        x = elems[done]
        done += 1
        for y in elems[:done - 1]:
            b = _bracket(x, y, n)
            if not b:
                continue
            if cartan_probe:
                if any(_trace_product(z, b, n) for z in elems):
                    return e, True
                derived.append(b)
            if e.add(b):
                if cartan_probe and any(_trace_product(b, d, n) for d in derived):
                    return e, True
                elems.append(b)
    return e, False


def is_maximal_solvable(b: LieSubalgebra) -> bool:
    """No complement basis element of b in its ambient extends b solvably."""
    if not is_solvable(b):
        raise PreconditionError("subalgebra is not solvable", condition="solvable")
    A = b.ambient
    n = A.n
    base = b.basis_sparse
    for x in complement_basis(b.space, A.space):
        e, broke = _saturate([to_sparse(x)] + base, n, cartan_probe=True)
        if broke:
            continue
        if is_solvable(_from_echelon(A, e)):
            return False
        raise InvariantError(
            "bracket closure passed the trace test yet is not solvable", invariant="cartan_criterion"
        )
    return True


def normalizer(b: LieSubalgebra, A: Ambient) -> LieSubalgebra:
    """{Z in A : [Z, b] ⊆ b}.  ``b`` may live outside A (relative normalizer)."""
    n = A.n
    if b.n != n:
        raise InputError("subalgebra and ambient act on different spaces")
    eb = b.space.echelon()
    basis = A.basis_sparse
    m = len(basis)
    cons = Echelon(m)
    for y in b.basis_sparse:
        residues = [eb.reduce(_bracket(z, y, n)) for z in basis]
        coords: dict = {}
        for k, r in enumerate(residues):
            for j, c in r.items():
                coords.setdefault(j, {})[k] = c
        for row in coords.values():
            cons.add(row)
            if len(cons) == m:
                return LieSubalgebra(A, Subspace.zero(n * n))
    return _lift(A, cons)


def _lift(A: Ambient, cons: Echelon) -> LieSubalgebra:
    """Elements sum c_k B_k of A for c in the kernel of the constraint rows."""
    n = A.n
    basis = A.basis_sparse
    out = Echelon(n * n)
    for c in kernel_sparse(cons.sparse_rows(), len(basis)):
        v: dict = {}
        for k, ck in c.items():
            for j, x in basis[k].items():
                v[j] = v.get(j, 0) + ck * x
        out.add(v)
    return _from_echelon(A, out)


def orbit(b: LieSubalgebra, u: Sequence) -> Subspace:
    n = b.n
    u = as_vector(u, n)
    return span([_apply(z, u, n) for z in b.basis_sparse], n)


# -- stabilizers ---------------------------------------------------------------


def _brute_stabilizer(F: GeneralizedFlag, A: Ambient) -> LieSubalgebra:
    n = A.n
    basis = A.basis_sparse
    m = len(basis)
    cons = Echelon(m)
    for S in F.members:
        if S.is_zero() or S.is_full():
            continue
        ann = annihilator_rows(S)
        for f in S.basis:
            images = [_apply(z, f, n) for z in basis]
            for a in ann:
                row = {}
                for k, img in enumerate(images):
                    c = sum((x * img[j] for j, x in a.items() if img[j]), Fraction(0))
                    if c:
                        row[k] = c
                if row:
                    cons.add(row)
    return _lift(A, cons)


def _formula_precondition(F: GeneralizedFlag, A: Ambient):
    if A.kind == "extension" or A.window:
        raise PreconditionError(
            "stabilizer formulas need a plain gl/sl/so/sp ambient", condition="plain_ambient"
        )
    if F.ambient_dim != A.n:
        raise InputError("flag and ambient act on different spaces", field="flag")
    P = A.form
    if A.kind in ("gl", "sl"):
        if not F.support.is_full():
            raise PreconditionError("flag does not exhaust V", condition="support_full")
        return
    if not is_isotropic(F.support, P):
        raise PreconditionError("flag is not isotropic", condition="isotropic")
    if not classify(F.support, P).is_maximal_isotropic:
        raise PreconditionError(
            "isotropic flag does not reach a maximal isotropic subspace",
            condition="maximal_isotropic_support",
        )


def _formula(F: GeneralizedFlag, A: Ambient, nilpotent: bool) -> LieSubalgebra:
    _formula_precondition(F, A)
    P = A.form
    kind = _TENSOR_FOR[A.kind]
    terms = [(p.succ, perp(p.succ if nilpotent else p.pred, P)) for p in F.pairs]
    e = _tensor_span(kind, terms, P)
    space = e.subspace()
    if A.kind == "sl" and not nilpotent:
        space = intersect(space, A.space)
    return LieSubalgebra(A, space)


def stabilizer(F: GeneralizedFlag, A: Ambient, mode: str = "brute") -> LieSubalgebra:
    if F.ambient_dim != A.n:
        raise InputError("flag and ambient act on different spaces", field="flag")
    if mode == "brute":
        return _brute_stabilizer(F, A)
    if mode == "formula":
        return _formula(F, A, nilpotent=False)
    raise InputError(f"unknown stabilizer mode {mode!r}", field="mode")


def nilpotent_subalgebra(F: GeneralizedFlag, A: Ambient) -> LieSubalgebra:
    return _formula(F, A, nilpotent=True)


# -- line systems and toral parts ----------------------------------------------


@dataclass(frozen=True)
class LineSystem:
    lines_L: tuple
    lines_M: tuple

    def to_json(self) -> dict:
        return {
            "lines_L": [{"index": g, "line": S.to_json()} for g, S in self.lines_L],
            "lines_M": [{"index": g, "line": S.to_json()} for g, S in self.lines_M],
        }


def _new_pivot_row(pred: Subspace, succ: Subspace):
    old = set(pred.pivots)
    for r, p in zip(succ.basis, succ.pivots):
        if p not in old:
            return r
    raise InputError("successor adds no new pivot")


def line_system(F: GeneralizedFlag, A: Ambient) -> LineSystem:
    """Canonical lines L_c, M_c for a maximal (isotropic) flag.

    L_c is the RREF row of the successor carrying its new pivot.  M_c is
    the solution of <L_d, M_c> = delta_{cd} with free coordinates set to 0;
    for forms it is then corrected so that the M_c are mutually orthogonal.
    """
    _formula_precondition(F, A)
    if any(p.codim != 1 for p in F.pairs):
        raise PreconditionError("line systems need a maximal flag", condition="maximal")
    P = A.form
    Ls = [_new_pivot_row(p.pred, p.succ) for p in F.pairs]
    m_dim = P.right_dim
    g = P.gram
    rows = [
        tuple(sum((l[i] * g[i][j] for i in range(P.left_dim) if l[i]), Fraction(0)) for j in range(m_dim))
        for l in Ls
    ]
    columns = [tuple(r[j] for r in rows) for j in range(m_dim)]
    Ms = []
    for c in range(len(Ls)):
        target = tuple(Fraction(int(d == c)) for d in range(len(Ls)))
        sol = solve(columns, target, len(Ls))
        if sol is None:
            raise InvariantError("no dual line for a flag step", invariant="line_duality")
        Ms.append(tuple(sol))
    if A.kind in ("so", "sp"):
        raw = Ms
        Ms = []
        for c, m in enumerate(raw):
            v = list(m)
            for d, md in enumerate(raw):
                coef = P.value(m, md) / 2
                if coef:
                    v = [a - coef * b for a, b in zip(v, Ls[d])]
            Ms.append(tuple(v))
    lines_L = tuple((c + 1, span([l], P.left_dim)) for c, l in enumerate(Ls))
    lines_M = tuple((c + 1, span([m], m_dim)) for c, m in enumerate(Ms))
    return LineSystem(lines_L, lines_M)


def check_line_system(ls: LineSystem, A: Ambient):
    P = A.form
    Ls = dict(ls.lines_L)
    Ms = dict(ls.lines_M)
    if set(Ls) != set(Ms):
        raise InputError("L and M lines use different indices", field="lines")
    for g, S in list(Ls.items()) + list(Ms.items()):
        if S.dim != 1:
            raise InputError(f"line {g} is not 1-dimensional", field="lines")
    for g in Ls:
        for c in Ms:
            val = P.value(Ls[g].basis[0], Ms[c].basis[0])
            if (val != 0) != (g == c):
                raise InputError(f"<L_{g}, M_{c}> violates the duality condition", field=f"({g},{c})")
    if A.classical_kind in ("so", "sp"):
        for g in Ms:
            for c in Ms:
                if P.value(Ms[g].basis[0], Ms[c].basis[0]):
                    raise InputError(f"<M_{g}, M_{c}> is not zero", field=f"({g},{c})")


def toral_subalgebra(ls: LineSystem, A: Ambient) -> LieSubalgebra:
    check_line_system(ls, A)
    P = A.form
    kind = _TENSOR_FOR[A.classical_kind]
    Ms = dict(ls.lines_M)
    e = _tensor_span(kind, [(L, Ms[g]) for g, L in ls.lines_L], P)
    space = e.subspace()
    if A.classical_kind == "sl":
        space = intersect(space, A.space)
    return LieSubalgebra(A, space)


# -- element types -------------------------------------------------------------


def _power_zero(a: dict, n: int) -> bool:
    p = a
    for _ in range(n - 1):
        if not p:
            return True
        p = _mul(p, a, n)
    return not p


def is_nilpotent_element(Z) -> bool:
    Z = matrix(Z)
    n = len(Z)
    return _power_zero(_sp(Z, n), n)


def _squarefree_annihilates(Z: tuple) -> bool:
    n = len(Z)
    M = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in Z])
    lam = sympy.Symbol("lam")
    poly = M.charpoly(lam)
    sqf = sympy.Poly(sympy.sqf_part(poly.as_expr()), lam)
    coeffs = [Fraction(int(c.p), int(c.q)) for c in sqf.all_coeffs()]
    a = _sp(Z, n)
    # Horner: acc = acc * Z + c I
    acc: dict = {}
    for c in coeffs:
        acc = _mul(acc, a, n)
        if c:
            for i in range(n):
                k = i * n + i
                y = acc.get(k, 0) + c
                if y:
                    acc[k] = y
                else:
                    acc.pop(k, None)
    return not acc


def is_semisimple_element(Z) -> bool:
    return _squarefree_annihilates(matrix(Z))


def element_type(Z) -> str:
    """'nilpotent', 'semisimple' or 'mixed'.  The zero matrix counts as nilpotent."""
    Z = matrix(Z)
    if is_nilpotent_element(Z):
        return "nilpotent"
    if _squarefree_annihilates(Z):
        return "semisimple"
    return "mixed"


# -- stable chains -------------------------------------------------------------


def _restricted(ops: list, W: list, n_coords: int) -> list:
    """Matrices of the operators on the span of W (each op maps W into W)."""
    cols_of = [tuple(w) for w in W]
    out = []
    for op in ops:
        images = [op(w) for w in W]
        mat = []
        for img in images:
            c = solve(cols_of, img, n_coords)
            if c is None:
                raise InvariantError("operator does not preserve the subspace", invariant="stable")
            mat.append(c)
        # mat[j] = coordinates of op(W_j); transpose to get the matrix
        out.append([[mat[j][i] for j in range(len(W))] for i in range(len(W))])
    return out


def _smallest_rational_eigenvalue(M: list) -> Fraction | None:
    S = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row] for row in M])
    lam = sympy.Symbol("lam")
    roots = sympy.Poly(S.charpoly(lam).as_expr(), lam, domain="QQ").ground_roots()
    if not roots:
        return None
    r = min(roots)
    return Fraction(int(r.p), int(r.q))


def _kernel_in(vectors: list, op, lam: Fraction, dim: int) -> list:
    """Vectors of span(vectors) killed by op - lam, as new spanning vectors."""
    k = len(vectors)
    images = [tuple(a - lam * b for a, b in zip(op(v), v)) for v in vectors]
    rows = [tuple(img[i] for img in images) for i in range(dim)]
    out = []
    for c in kernel_sparse(rows, k):
        v = [Fraction(0)] * dim
        for j, cj in c.items():
            v = [a + cj * b for a, b in zip(v, vectors[j])]
        out.append(tuple(v))
    return span(out, dim).basis if out else []


def _common_eigenvector(ops: list, derived_ops: list, dim: int):
    W = list(Subspace.full(dim).basis)
    for op in derived_ops:
        W = _kernel_in(W, op, Fraction(0), dim)
        if not W:
            raise PreconditionError("derived algebra has no common kernel", condition="solvable")
    for op in ops:
        (M,) = _restricted([op], W, dim)
        lam = _smallest_rational_eigenvalue(M)
        if lam is None:
            raise PreconditionError(
                "no rational common eigenvector (eigenvalues outside Q)", condition="rational"
            )
        W = _kernel_in(W, op, lam, dim)
    return W[0]


def is_stable(S: Subspace, b: LieSubalgebra) -> bool:
    e = S.echelon()
    return all(e.contains(_apply(z, v, b.n)) for z in b.basis_sparse for v in S.basis)


def stable_maximal_chain(b: LieSubalgebra, lo: Subspace, hi: Subspace) -> Chain:
    """Maximal chain of b-stable subspaces from lo to hi with 1-dimensional steps.

    Each step adds a lift of a common eigenvector of b on hi / current.
    Ties go to the smallest rational eigenvalue and then to the first RREF
    row of the common eigenspace.
    """
    n = b.n
    if not is_solvable(b):
        raise PreconditionError("subalgebra is not solvable", condition="solvable")
    if not lo <= hi:
        raise InputError("lo is not contained in hi", field="lo")
    if not (is_stable(lo, b) and is_stable(hi, b)):
        raise PreconditionError("lo and hi must be b-stable", condition="stable")
    derived = _derived(b).basis_sparse
    members = [lo]
    current = lo
    while current != hi:
        comp = complement_basis(current, hi)
        cols = list(current.basis) + comp
        d = len(comp)
        skip = current.dim

        def quotient_op(z):
            def op(q):
                v = [Fraction(0)] * n
                for j, c in enumerate(q):
                    if c:
                        v = [a + c * x for a, x in zip(v, comp[j])]
                coords = solve(cols, _apply(z, v, n), n)
                if coords is None:
                    raise InvariantError("hi is not b-stable", invariant="stable")
                return tuple(coords[skip:])

            return op

        ops = [quotient_op(z) for z in b.basis_sparse]
        dops = [quotient_op(z) for z in derived]
        q = _common_eigenvector(ops, dops, d)
        v = [Fraction(0)] * n
        for j, c in enumerate(q):
            v = [a + c * x for a, x in zip(v, comp[j])]
        current = subspace_sum(current, span([v], n))
        members.append(current)
    return Chain(n, tuple(members))


__all__ = [
    "Ambient",
    "LieSubalgebra",
    "LineSystem",
    "apply",
    "bracket",
    "check_line_system",
    "derived_series",
    "element_type",
    "embed_tensor",
    "extend_ambient",
    "flatten",
    "full_subalgebra",
    "generated_subalgebra",
    "is_maximal_solvable",
    "is_nilpotent_element",
    "is_semisimple_element",
    "is_solvable",
    "is_stable",
    "line_system",
    "make_ambient",
    "matmul",
    "matrix",
    "nilpotent_subalgebra",
    "normalizer",
    "orbit",
    "stabilizer",
    "stable_maximal_chain",
    "subalgebra",
    "toral_subalgebra",
    "unflatten",
    "unit",
]
