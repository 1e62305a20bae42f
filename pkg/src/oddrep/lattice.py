"""Reduction, successive minima, isometry and embedding search for forms."""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np

from . import enumerate as _enum
from .forms import QuadraticForm, bareiss_det, theta_series


def _gram_of(a, u):
    """``U^T A U`` with Python integers; ``u`` is a list of column vectors."""
    r = len(u)
    n = len(a)
    au = [[sum(a[i][k] * u[j][k] for k in range(n)) for i in range(n)] for j in range(r)]
    return [[sum(u[i][k] * au[j][k] for k in range(n)) for j in range(r)] for i in range(r)]


def _cols_to_matrix(cols):
    """Matrix (list of rows) whose columns are ``cols``."""
    n = len(cols[0]) if cols else 0
    return [[cols[j][i] for j in range(len(cols))] for i in range(n)]


def lll_gram(gram, delta=Fraction(99, 100)):
    """LLL-reduce a positive-definite Gram matrix.

    Returns ``(reduced_gram, basis)`` where ``basis`` is a list of integer
    column vectors with ``basis^T A basis = reduced_gram``.
    """
    n = len(gram)
    a = [list(map(int, row)) for row in gram]
    b = [[int(i == j) for i in range(n)] for j in range(n)]

    def ip(x, y):
        return sum(x[i] * a[i][j] * y[j] for i in range(n) for j in range(n))

    k = 1
    while k < n:
        # Gram-Schmidt coefficients recomputed from scratch (tiny ranks)
        mu = [[Fraction(0)] * n for _ in range(n)]
        bstar = [Fraction(0)] * n
        for i in range(k + 1):
            for j in range(i):
                s = Fraction(ip(b[i], b[j]))
                for t in range(j):
                    s -= mu[j][t] * mu[i][t] * bstar[t]
                mu[i][j] = s / bstar[j]
            s = Fraction(ip(b[i], b[i]))
            for t in range(i):
                s -= mu[i][t] ** 2 * bstar[t]
            bstar[i] = s
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                for t in range(j + 1):
                    mu[k][t] -= q * (mu[j][t] if t < j else 1)
        if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            k = max(k - 1, 1)
    return _gram_of(a, b), b


def _extendable(cols):
    """True if the integer vectors ``cols`` are part of a basis of Z^n."""
    n = len(cols[0])
    m = len(cols)
    g = 0
    for rows in _combinations(range(n), m):
        g = math.gcd(g, bareiss_det([[cols[j][i] for j in range(m)] for i in rows]))
        if g == 1:
            return True
    return False


def _combinations(seq, k):
    seq = list(seq)
    if k == 0:
        yield ()
        return
    for i in range(len(seq) - k + 1):
        for rest in _combinations(seq[i + 1:], k - 1):
            yield (seq[i],) + rest


def _rank(cols):
    if not cols:
        return 0
    m = np.array(cols, dtype=float)
    return int(np.linalg.matrix_rank(m))


def successive_minima(q):
    """Successive minima of the lattice, as a nondecreasing integer list."""
    if q.rank == 0:
        return []
    red, _ = lll_gram(q.gram)
    top = max(red[i][i] for i in range(q.rank)) // 2
    vecs, norms = _enum.vectors_up_to(q.matrix, top, lo_norm=1)
    order = np.argsort(norms, kind="stable")
    chosen = []
    minima = []
    for idx in order:
        v = vecs[idx].tolist()
        if _rank(chosen + [v]) > len(chosen):
            chosen.append(v)
            minima.append(int(norms[idx]))
            if len(chosen) == q.rank:
                break
    return minima


def reduce_with_basis(q):
    """Reduced Gram matrix and the basis (integer columns) producing it.

    The first basis vectors are chosen greedily among shortest vectors subject
    to extending to a basis of the lattice, after an LLL pass.  For rank at
    most four this realizes the successive minima on the diagonal.
    """
    r = q.rank
    if r == 0:
        return QuadraticForm.empty(), []
    red, base = lll_gram(q.gram)
    top = max(red[i][i] for i in range(r)) // 2
    vecs, norms = _enum.vectors_up_to(q.matrix, top, lo_norm=1)
    order = np.lexsort((np.arange(len(norms)), norms))
    chosen = []
    for idx in order:
        v = vecs[idx].tolist()
        # keep one of each +-pair: first nonzero coordinate positive
        nz = next(x for x in v if x != 0)
        if nz < 0:
            continue
        trial = chosen + [v]
        if _rank(trial) == len(trial) and _extendable(trial):
            chosen = trial
            if len(chosen) == r:
                break
    if len(chosen) < r:
        chosen = base
    g = _gram_of(q.gram, chosen)
    # size reduction against earlier vectors; signs normalized below
    changed = True
    while changed:
        changed = False
        for i in range(r):
            for j in range(r):
                if i == j:
                    continue
                t = round(Fraction(g[i][j], g[j][j]))
                if t and g[i][i] - 2 * t * g[i][j] + t * t * g[j][j] < g[i][i]:
                    chosen[i] = [x - t * y for x, y in zip(chosen[i], chosen[j])]
                    g = _gram_of(q.gram, chosen)
                    changed = True
    # sign of each vector fixed by its first nonzero inner product with an earlier one
    for i in range(1, r):
        first = next((g[j][i] for j in range(i) if g[j][i]), 0)
        if first > 0:
            chosen[i] = [-x for x in chosen[i]]
            g = _gram_of(q.gram, chosen)
    return QuadraticForm(g), chosen


def reduce(q):
    """An isometric form with small, nondecreasing diagonal."""
    return reduce_with_basis(q)[0]


def _int_inverse(cols):
    """Inverse of a unimodular integer matrix given by columns; returned as columns."""
    from .forms import fraction_inverse

    inv = fraction_inverse(_cols_to_matrix(cols))
    n = len(cols)
    return [[int(inv[i][j]) for i in range(n)] for j in range(n)]


def _matmul_cols(a_cols, b_cols):
    """Columns of A*B where both are given as column lists."""
    n = len(a_cols[0])
    return [[sum(a_cols[k][i] * bc[k] for k in range(len(bc))) for i in range(n)] for bc in b_cols]


def invariants(q, depth=None):
    """Cheap isometry invariants: discriminant, successive minima and a theta prefix."""
    mins = tuple(successive_minima(q))
    depth = depth if depth is not None else (mins[-1] if mins else 0)
    th = theta_series(q, depth).coefficients
    return (q.rank, q.disc, mins, tuple(int(v) for v in th))


def _search_images(target_gram, source, want_unimodular, limit=1):
    """Find column vectors v_i in the lattice of ``source`` with Gram ``target_gram``.

    Yields lists of columns.  When ``want_unimodular`` only bases of the
    whole lattice are produced (isometry), otherwise any embedding.
    """
    m = len(target_gram)
    top = max(target_gram[i][i] for i in range(m)) // 2
    vecs, norms = _enum.vectors_up_to(source.matrix, top, lo_norm=1)
    a = source.matrix
    av = vecs @ a  # row i is (A v_i)^T
    by_norm = {}
    for i, nm in enumerate(norms.tolist()):
        by_norm.setdefault(nm, []).append(i)
    cand = [np.array(by_norm.get(target_gram[i][i] // 2, []), dtype=np.int64) for i in range(m)]
    if any(len(c) == 0 for c in cand):
        return
    found = 0
    chosen = []

    def rec(k, pool):
        nonlocal found
        if k == m:
            cols = [vecs[i].tolist() for i in chosen]
            if want_unimodular and abs(bareiss_det(_cols_to_matrix(cols))) != 1:
                return False
            yield cols
            found += 1
            return found >= limit
        idx = pool[k]
        if k == 0 and want_unimodular:
            # -1 is always an automorphism: fix the sign of the first image
            first_nz = np.argmax(vecs[idx] != 0, axis=1)
            idx = idx[vecs[idx, first_nz] > 0]
        for i in idx:
            v = int(i)
            new_pool = list(pool)
            for j in range(k + 1, m):
                c = pool[j]
                if len(c):
                    c = c[av[c] @ vecs[v] == target_gram[k][j]]
                new_pool[j] = c
            if any(len(new_pool[j]) == 0 for j in range(k + 1, m)):
                continue
            chosen.append(v)
            stop = yield from rec(k + 1, new_pool)
            chosen.pop()
            if stop:
                return True
        return False

    yield from rec(0, cand)


@dataclass(frozen=True)
class Embedding:
    """Integer matrix ``L`` (columns = images of the basis of R) with ``L^T A_Q L = A_R``."""

    matrix: tuple

    def columns(self):
        return [list(col) for col in zip(*self.matrix)]

    def verify(self, q, r):
        cols = self.columns()
        return _gram_of(q.gram, cols) == [list(row) for row in r.gram]


def is_isometric(q1, q2, with_witness=False):
    """Decide whether ``q1`` and ``q2`` are integrally equivalent.

    With ``with_witness`` returns ``(flag, U)`` where ``U^T A1 U = A2``.
    """
    def answer(flag, u=None):
        return (flag, u) if with_witness else flag

    if q1.rank != q2.rank or q1.disc != q2.disc:
        return answer(False)
    if q1.rank == 0:
        return answer(True, [])
    if q1.gram == q2.gram:
        ident = [[int(i == j) for j in range(q1.rank)] for i in range(q1.rank)]
        return answer(True, ident)
    r2, b2 = reduce_with_basis(q2)
    r1 = reduce(q1)
    if sorted(r1.gram[i][i] for i in range(r1.rank)) != sorted(r2.gram[i][i] for i in range(r2.rank)):
        # reduced diagonals agree for isometric forms of rank <= 4; compare theta instead of trusting it
        top = max(max(r1.gram[i][i] for i in range(r1.rank)), max(r2.gram[i][i] for i in range(r2.rank))) // 2
        if not np.array_equal(theta_series(q1, top).coefficients, theta_series(q2, top).coefficients):
            return answer(False)
    for cols in _search_images([list(row) for row in r2.gram], q1, True):
        # cols: images of the reduced basis of q2 inside q1; U = V * B2^{-1}
        u_cols = _matmul_cols(cols, _int_inverse(b2))
        return answer(True, _cols_to_matrix(u_cols))
    return answer(False)


def represents_form(q, r):
    """An :class:`Embedding` of ``r`` into ``q`` or ``None``."""
    for emb in embeddings(q, r, limit=1):
        return emb
    return None


def embeddings(q, r, limit=1):
    """Up to ``limit`` embeddings of ``r`` into ``q`` (not up to automorphism)."""
    if r.rank > q.rank:
        return
    if r.rank == 0:
        yield Embedding(tuple(() for _ in range(q.rank)))
        return
    red, basis = reduce_with_basis(r)
    inv = _int_inverse(basis)
    for cols in _search_images([list(row) for row in red.gram], q, False, limit=limit):
        l_cols = _matmul_cols(cols, inv)
        yield Embedding(tuple(tuple(row) for row in _cols_to_matrix(l_cols)))


def hermite_basis(generators, dim):
    """Z-basis (list of row vectors) of the lattice spanned by integer row vectors."""
    rows = [list(map(int, g)) for g in generators if any(g)]
    basis = []
    for col in range(dim):
        active = [r for r in rows if r[col] != 0]
        rest = [r for r in rows if r[col] == 0]
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                t = r[col] // piv[col]
                r = [x - t * y for x, y in zip(r, piv)]
                if r[col] != 0:
                    nxt.append(r)
                elif any(r):
                    rest.append(r)
            active = nxt
        if active:
            piv = active[0]
            basis.append([-x for x in piv] if piv[col] < 0 else piv)
        rows = rest
    return basis


def integer_kernel(rows, n):
    """Z-basis (list of vectors) of ``{x in Z^n : M x = 0}`` for the integer matrix ``rows``."""
    m = [list(map(int, r)) for r in rows]
    u = [[int(i == j) for j in range(n)] for i in range(n)]  # columns of the unimodular transform
    pivot_cols = 0
    for row in range(len(m)):
        # column operations to clear m[row][k] for k > pivot_cols
        while True:
            nz = [k for k in range(pivot_cols, n) if m[row][k] != 0]
            if len(nz) <= 1:
                break
            k0 = min(nz, key=lambda k: abs(m[row][k]))
            for k in nz:
                if k == k0:
                    continue
                t = m[row][k] // m[row][k0]
                for rr in m:
                    rr[k] -= t * rr[k0]
                u[k] = [a - t * b for a, b in zip(u[k], u[k0])]
        if nz:
            k0 = nz[0]
            for rr in m:
                rr[pivot_cols], rr[k0] = rr[k0], rr[pivot_cols]
            u[pivot_cols], u[k0] = u[k0], u[pivot_cols]
            pivot_cols += 1
    return [u[k] for k in range(pivot_cols, n)]


def orthogonal_complement(q, cols):
    """Basis of the sublattice orthogonal to the given vectors (columns in Z^r)."""
    a = q.gram
    rows = [[sum(c[i] * a[i][j] for i in range(q.rank)) for j in range(q.rank)] for c in cols]
    return integer_kernel(rows, q.rank)


def restrict(q, cols):
    """The form induced on the sublattice spanned by ``cols``."""
    return QuadraticForm(_gram_of(q.gram, cols))
