"""Numbered acceptance criteria; the terminal summary prints one line per criterion."""

import random
import time
from collections import defaultdict
from fractions import Fraction

import pytest

from flagstab.exact_linalg import Subspace, intersect, span, subspace_sum
from flagstab.flagkit import (
    GeneralizedFlag,
    basis_aligned_isotropic_flags,
    coordinate_flags,
    fl_from_chain,
    isotropic_flag_from_labels,
    random_isometry,
    random_isotropic_flag,
    random_maximal_flag,
    signed_sequences,
    twin,
)
from flagstab.liealg import (
    bracket,
    element_type,
    extend_ambient,
    is_maximal_solvable,
    is_solvable,
    line_system,
    make_ambient,
    nilpotent_subalgebra,
    normalizer,
    orbit,
    stabilizer,
    toral_subalgebra,
)
from flagstab.limits import SIGNED, PairingDescriptor, closure_certified, fl_stable, truncate_chain
from flagstab.pairing import (
    classify,
    closure,
    is_isotropic,
    perp,
    split_symmetric,
    split_symplectic,
    standard_dual,
)
from flagstab.scenarios import builtin, predicted_orbit

acceptance = pytest.mark.acceptance


def zero_matrix(n):
    return [[Fraction(0)] * n for _ in range(n)]


def frozen(M):
    return tuple(tuple(r) for r in M)


def borel_dim(kind, n):
    """Dimension of a Borel subalgebra, by the root count of each type."""
    if kind == "gl":
        return n * (n + 1) // 2
    if kind == "sl":
        return n * (n + 1) // 2 - 1
    half = n // 2
    if kind == "sp":
        return half * half + half
    return half * half if n % 2 else half * (half - 1)


def random_form(kind, rng, low=2):
    if kind == "so":
        return split_symmetric(rng.randint(low, 6))
    return split_symplectic(2 * rng.randint(1, 3))


def sampled_flags(kind, count=20, seed=0):
    """(ambient, flag) pairs: random maximal flags for gl/sl, random maximal isotropic flags for so/sp."""
    rng = random.Random(f"{kind}-{seed}")
    out = []
    for _ in range(count):
        if kind in ("gl", "sl"):
            n = rng.randint(2, 6)
            out.append((make_ambient(kind, n), random_maximal_flag(n, rng)))
        else:
            P = random_form(kind, rng)
            out.append((make_ambient(kind, P), random_isotropic_flag(P, rng)))
    return out


# -- 1 ---------------------------------------------------------------------------


@acceptance(1, "stabilizer oracle on coordinate and random maximal flags of gl/sl")
def test_criterion_1_stabilizer_oracle():
    started = time.perf_counter()
    cases = []
    for kind in ("gl", "sl"):
        for n in range(1, 5):
            cases += [(kind, n, F) for F in coordinate_flags(n)]
    rng = random.Random(2024)
    for _ in range(50):
        n = rng.randint(1, 6)
        F = random_maximal_flag(n, rng)
        cases += [("gl", n, F), ("sl", n, F)]
    assert sum(1 for k, n, _ in cases if k == "gl" and n <= 4) == 1 + 2 + 6 + 24 + sum(
        1 for k, n, _ in cases[66:] if k == "gl" and n <= 4
    )
    for kind, n, F in cases:
        A = make_ambient(kind, n)
        brute = stabilizer(F, A, "brute")
        assert brute.space == stabilizer(F, A, "formula").space
        assert brute.dim == borel_dim(kind, n)
        assert is_solvable(brute)
        assert is_maximal_solvable(brute)
    assert time.perf_counter() - started < 60


# -- 2 ---------------------------------------------------------------------------


@acceptance(2, "sl_4 coordinate flags give 24 distinct stabilizers")
def test_criterion_2_injectivity():
    import itertools

    A = make_ambient("sl", 4)
    found = set()
    for perm in itertools.permutations(range(4)):
        vectors = [tuple(Fraction(int(i == p)) for i in range(4)) for p in perm]
        F = GeneralizedFlag.from_vectors(vectors, 4)
        b = stabilizer(F, A)
        # independent description: upper triangular in the permuted basis, trace zero
        units = []
        for a in range(4):
            for c in range(a, 4):
                M = zero_matrix(4)
                M[perm[a]][perm[c]] = Fraction(1)
                units.append([x for row in M for x in row])
        expected = intersect(span(units, 16), A.space)
        assert b.space == expected
        found.add(b.space)
    assert len(found) == 24


# -- 3 ---------------------------------------------------------------------------


def fibers(P, A):
    groups = defaultdict(set)
    for F in basis_aligned_isotropic_flags(P):
        groups[stabilizer(F, A).space].add(F)
    return groups


@acceptance(3, "so fibers are twin pairs in dims 4 and 6 and singletons in dim 5")
def test_criterion_3_twin_fibers():
    started = time.perf_counter()
    for dim in (4, 6):
        P = split_symmetric(dim)
        A = make_ambient("so", P)
        groups = fibers(P, A)
        for seq in signed_sequences(dim // 2):
            F = isotropic_flag_from_labels(P, seq)
            flipped = isotropic_flag_from_labels(P, seq[:-1] + (-seq[-1],))
            fiber = groups[stabilizer(F, A).space]
            assert len(fiber) == 2
            assert fiber == {F, flipped}
            assert fiber == {F, twin(F, P)}
    P = split_symmetric(5)
    A = make_ambient("so", P)
    groups = fibers(P, A)
    assert len(groups) == len(basis_aligned_isotropic_flags(P))
    assert all(len(f) == 1 for f in groups.values())
    assert time.perf_counter() - started < 60


# -- 4 ---------------------------------------------------------------------------


@acceptance(4, "sp flags map injectively to maximal solvable stabilizers")
def test_criterion_4_sp_bijectivity():
    started = time.perf_counter()
    for dim in (4, 6):
        P = split_symplectic(dim)
        A = make_ambient("sp", P)
        flags = basis_aligned_isotropic_flags(P)
        stabs = [stabilizer(F, A) for F in flags]
        assert len({b.space for b in stabs}) == len(flags)
        for b in stabs:
            assert b.dim == borel_dim("sp", dim)
            assert is_maximal_solvable(b)
    assert time.perf_counter() - started < 120


# -- 5 ---------------------------------------------------------------------------


@acceptance(5, "stabilizer splits as toral plus nilpotent parts")
@pytest.mark.parametrize("kind", ["gl", "sl", "so", "sp"])
def test_criterion_5_toral_plus_nilpotent(kind):
    for A, F in sampled_flags(kind):
        b = stabilizer(F, A)
        t = toral_subalgebra(line_system(F, A), A)
        nil = nilpotent_subalgebra(F, A)
        assert subspace_sum(t.space, nil.space) == b.space
        assert intersect(t.space, nil.space).is_zero()
        assert all(element_type(Z) == "semisimple" for Z in t.basis)
        assert all(element_type(Z) == "nilpotent" for Z in nil.basis)
        assert b.dim == t.dim + nil.dim


# -- 6 ---------------------------------------------------------------------------


def all_tested_flags():
    for kind in ("gl", "sl"):
        for n in range(1, 5):
            A = make_ambient(kind, n)
            for F in coordinate_flags(n):
                yield A, F
    for dim in (4, 5, 6):
        P = split_symmetric(dim)
        A = make_ambient("so", P)
        for F in basis_aligned_isotropic_flags(P):
            yield A, F
    for dim in (4, 6):
        P = split_symplectic(dim)
        A = make_ambient("sp", P)
        for F in basis_aligned_isotropic_flags(P):
            yield A, F
    for kind in ("gl", "sl", "so", "sp"):
        yield from sampled_flags(kind)


@acceptance(6, "orbits match the case tables")
def test_criterion_6_orbit_tables():
    rng = random.Random(6)
    for A, F in all_tested_flags():
        b = stabilizer(F, A)
        basis = F.support.basis
        coefs = [rng.randint(-2, 2) for _ in basis]
        mixed = [sum((c * Fraction(v[k]) for c, v in zip(coefs, basis)), Fraction(0)) for k in range(A.n)]
        for u in [*basis, mixed] if any(mixed) else basis:
            assert orbit(b, u) == predicted_orbit(F, A, u)


# -- 7 ---------------------------------------------------------------------------


@acceptance(7, "first infinite example: truncated stabilizers are Borel of the expected dimension")
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_criterion_7_example_1(n):
    sc = builtin("paper_example_1")
    F = sc.flag_at(n)
    A = sc.ambient_at(n)
    assert A.n == 2 * n and A.kind == "sl"
    # F_i is spanned by x_j with j <= i, which in label order is a coordinate prefix
    prefixes = [span([tuple(Fraction(int(i == j)) for j in range(2 * n)) for i in range(k)], 2 * n) for k in range(2 * n + 1)]
    assert list(F.members) == prefixes
    b = stabilizer(F, A)
    assert b.dim == (2 * n) * (2 * n + 1) // 2 - 1
    assert is_maximal_solvable(b)


# -- 8 ---------------------------------------------------------------------------


@acceptance(8, "second infinite example: the bracket and the forced zero coefficient")
@pytest.mark.parametrize("n", [2, 3, 4])
def test_criterion_8_example_2(n):
    sc = builtin("paper_example_2")
    big = n + 2
    labels = SIGNED.labels(big)
    pos = {l: k for k, l in enumerate(labels)}
    size = len(labels)

    X = zero_matrix(size)
    for i in range(1, big + 1):
        X[pos[i]][pos[i]] += 1
        X[pos[i]][pos[-i]] += 1
    X = frozen(X)
    assert sc.extra_at(big) == X

    Z = zero_matrix(size)
    Z[pos[n + 1]][pos[n + 1]] = Fraction(1)
    Z[pos[n + 2]][pos[n + 2]] = Fraction(-1)
    Z = frozen(Z)
    expected = zero_matrix(size)
    expected[pos[n + 1]][pos[-(n + 1)]] = Fraction(-1)
    expected[pos[n + 2]][pos[-(n + 2)]] = Fraction(1)
    expected = frozen(expected)

    P = standard_dual(size, labels)
    window = make_ambient("sl", P, window=SIGNED.labels(n))
    b = stabilizer(sc.flag_at(big), make_ambient("sl", P))
    assert Z in b

    rng = random.Random(n)
    for _ in range(5):
        Y = [[Fraction(0)] * size for _ in range(size)]
        for M in window.basis:
            c = Fraction(rng.randint(-3, 3))
            Y = [[y + c * m for y, m in zip(yr, mr)] for yr, mr in zip(Y, M)]
        a = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        YaX = [[y + a * x for y, x in zip(yr, xr)] for yr, xr in zip(Y, X)]
        assert bracket(YaX, Z) == tuple(tuple(a * c for c in row) for row in expected)
    assert bracket(X, Z) not in b

    A = extend_ambient(window, [X])
    N = normalizer(b, A)
    # every normalizer element is Y + aX with Y in the window; a must vanish
    assert N.space <= window.space
    assert N.space == intersect(b.space, A.space)
    small = stabilizer(sc.flag_at(n), make_ambient("sl", standard_dual(2 * n, SIGNED.labels(n))))
    assert N.dim == small.dim


# -- 9 ---------------------------------------------------------------------------


def random_subspace(n, rng):
    k = rng.randint(0, n)
    return span([[Fraction(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(n)] for _ in range(k)], n)


def random_isotropic_subspace(P, rng):
    F = random_isotropic_flag(P, rng)
    return F.members[rng.randint(0, len(F.members) - 1)]


@acceptance(9, "closure calculus on random subspaces and the dense hyperplane")
@pytest.mark.parametrize("form", ["standard_dual", "split_symmetric", "split_symplectic"])
def test_criterion_9_closure_calculus(form):
    rng = random.Random(form)
    for _ in range(200):
        if form == "split_symplectic":
            P = split_symplectic(2 * rng.randint(1, 4))
        elif form == "split_symmetric":
            P = split_symmetric(rng.randint(1, 8))
        else:
            P = standard_dual(rng.randint(1, 8))
        n = P.left_dim
        S = random_subspace(n, rng)
        Sp = perp(S, P)
        assert perp(perp(Sp, P, "right"), P) == Sp
        assert closure(closure(S, P), P) == closure(S, P)
        # nondegenerate and finite: perp has complementary dimension, every subspace is closed
        assert Sp.dim == n - S.dim
        assert closure(S, P) == S
        if form == "standard_dual":
            continue
        I = random_isotropic_subspace(P, rng)
        assert is_isotropic(I, P)
        assert is_isotropic(closure(I, P), P)
        # Witt index of a split form is floor(n/2)
        for T in (S, I):
            iso = is_isotropic(T, P)
            assert classify(T, P).is_maximal_isotropic == (iso and T.dim == n // 2)
        g = random_isometry(P, rng)
        moved = span([g(v) for v in I.basis], n)
        assert moved.dim == I.dim and is_isotropic(moved, P)

    if form == "standard_dual":
        sc = builtin("dense_hyperplane")
        for level in range(3, 9):
            got, cert = closure_certified(sc.subspace, sc.pairing, level)
            assert got == Subspace.full(level)
            assert cert.stable
        assert sc.pairing == PairingDescriptor("standard_dual", sc.pairing.domain)


# -- 10 --------------------------------------------------------------------------


@acceptance(10, "fl of a chain: both outcomes and commutation with truncation")
@pytest.mark.parametrize("name,differs", [("fl_chain_gap", True), ("fl_chain_nogap", False)])
def test_criterion_10_fl_outcomes(name, differs):
    sc = builtin(name)
    lower, upper = sc.chain[1], sc.chain[2]
    union = lower.limit()
    meet = upper.limit()
    assert union.index_part.render() == "{-inf..-1}"
    assert meet.index_part.render() == ("{-inf..1}" if differs else "{-inf..-1}")
    D = fl_stable(sc.chain)
    between = [p for p in D.inserted_pairs if p.pred == union and p.succ == meet]
    assert bool(between) == (union != meet) == differs
    for level in range(3, 7):
        dim = SIGNED.dim(level)
        assert D.truncate(level) == fl_from_chain(truncate_chain(sc.chain, level), Subspace.full(dim))
