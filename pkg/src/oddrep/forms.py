"""Positive-definite integer-valued quadratic forms.

A form is stored through its Gram matrix ``A`` (symmetric, integral, even
diagonal) so that ``Q(x) = x^T A x / 2`` is integer valued.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import json
import math
import re

import numpy as np

from . import enumerate as _enum
from .errors import (
    NotPositiveDefinite,
    NotSymmetric,
    OddDiagonal,
    ParseError,
    ResourceLimitExceeded,
)

VARIABLES = "xyzwv"

# Default cap on the number of lattice points a single enumeration may visit.
DEFAULT_MAX_VECTORS = 4 * 10**9


def bareiss_det(m):
    """Exact determinant of a square integer matrix (fraction-free elimination)."""
    a = [[int(v) for v in row] for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def fraction_inverse(m):
    """Exact inverse of a nonsingular integer or rational matrix as Fractions."""
    n = len(m)
    a = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [vi - f * vc for vi, vc in zip(a[i], a[col])]
    return [row[n:] for row in a]


@dataclass(frozen=True)
class CholeskyData:
    """Exact factorization ``A = M^T diag(a) M`` with ``M`` upper unitriangular."""

    diag: tuple
    unitriangular: tuple

    def reconstruct(self):
        r = len(self.diag)
        m = self.unitriangular
        return [[sum(m[k][i] * self.diag[k] * m[k][j] for k in range(r)) for j in range(r)] for i in range(r)]


class QuadraticForm:
    """Immutable positive-definite form ``x^T A x / 2``; build it with :func:`validate_gram`."""

    __slots__ = ("gram", "__dict__")

    def __init__(self, gram):
        self.gram = tuple(tuple(int(v) for v in row) for row in gram)

    @classmethod
    def empty(cls):
        """The zero-dimensional form, the root of every escalation tree."""
        return cls(())

    @property
    def rank(self):
        return len(self.gram)

    @cached_property
    def matrix(self):
        m = np.array(self.gram, dtype=np.int64).reshape(self.rank, self.rank)
        m.setflags(write=False)
        return m

    @cached_property
    def disc(self):
        return bareiss_det(self.gram)

    @cached_property
    def level(self):
        if self.rank == 0:
            return 1
        inv = fraction_inverse(self.gram)
        n = 1
        for i in range(self.rank):
            for j in range(self.rank):
                v = inv[i][j] / 2 if i == j else inv[i][j]
                n = math.lcm(n, v.denominator)
        return n

    @cached_property
    def character_disc(self):
        """Discriminant ``(-1)^(r/2) det A`` of the quadratic character; ``None`` for odd rank."""
        if self.rank % 2:
            return None
        return (-1) ** (self.rank // 2) * self.disc

    def __call__(self, x):
        x = [int(v) for v in x]
        r = self.rank
        total = 0
        for i in range(r):
            total += self.gram[i][i] // 2 * x[i] * x[i]
            for j in range(i + 1, r):
                total += self.gram[i][j] * x[i] * x[j]
        return total

    def bilinear(self, x, y):
        """``x^T A y``, so that ``Q(x) = bilinear(x, x) / 2``."""
        return sum(int(x[i]) * self.gram[i][j] * int(y[j]) for i in range(self.rank) for j in range(self.rank))

    def __eq__(self, other):
        return isinstance(other, QuadraticForm) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return f"QuadraticForm({self.polynomial()})"

    def to_json(self):
        return json.dumps({"gram": [list(r) for r in self.gram]})

    def polynomial(self):
        """Human readable polynomial such as ``x^2+xy+3y^2``."""
        terms = []
        names = VARIABLES if self.rank <= len(VARIABLES) else [f"x{i + 1}" for i in range(self.rank)]
        for i in range(self.rank):
            for j in range(i, self.rank):
                c = self.gram[i][j] // 2 if i == j else self.gram[i][j]
                if c == 0:
                    continue
                mono = f"{names[i]}^2" if i == j else f"{names[i]}{names[j]}"
                coef = "" if abs(c) == 1 else str(abs(c))
                terms.append(("-" if c < 0 else "+") + coef + mono)
        return "".join(terms).lstrip("+") or "0"

    def direct_sum(self, other):
        r, s = self.rank, other.rank
        g = [[0] * (r + s) for _ in range(r + s)]
        for i in range(r):
            for j in range(r):
                g[i][j] = self.gram[i][j]
        for i in range(s):
            for j in range(s):
                g[r + i][r + j] = other.gram[i][j]
        return QuadraticForm(g)

    def transform(self, u):
        """Form with Gram ``U^T A U`` for an integer matrix ``U`` (columns are new basis vectors)."""
        u = np.asarray(u, dtype=object)
        a = np.array(self.gram, dtype=object).reshape(self.rank, self.rank)
        return QuadraticForm((u.T.dot(a).dot(u)).tolist())


def validate_gram(matrix):
    """Check a candidate Gram matrix and return the corresponding :class:`QuadraticForm`."""
    try:
        rows = [[v for v in row] for row in matrix]
    except TypeError as exc:
        raise NotSymmetric("Gram matrix must be a list of rows") from exc
    r = len(rows)
    if r == 0 or any(len(row) != r for row in rows):
        raise NotSymmetric("Gram matrix must be square and nonempty")
    for i in range(r):
        for j in range(r):
            v = rows[i][j]
            if int(v) != v:
                raise NotSymmetric(f"entry ({i},{j}) is not an integer")
    rows = [[int(v) for v in row] for row in rows]
    for i in range(r):
        for j in range(i + 1, r):
            if rows[i][j] != rows[j][i]:
                raise NotSymmetric(f"entry ({i},{j}) = {rows[i][j]} differs from ({j},{i}) = {rows[j][i]}")
    for i in range(r):
        if rows[i][i] % 2:
            raise OddDiagonal(f"diagonal entry {i} = {rows[i][i]} is odd")
    for k in range(1, r + 1):
        minor = bareiss_det([row[:k] for row in rows[:k]])
        if minor <= 0:
            raise NotPositiveDefinite(f"leading principal minor of size {k} is {minor}")
    return QuadraticForm(rows)


def discriminant(q):
    return q.disc


def level(q):
    return q.level


def dual_form(q):
    """The form ``x^T (N A^-1) x / 2`` where ``N`` is the level of ``q``."""
    n = q.level
    inv = fraction_inverse(q.gram)
    g = [[int(n * v) for v in row] for row in inv]
    return QuadraticForm(g)


def cholesky(q):
    """Exact rational factorization ``A = M^T D M``."""
    r = q.rank
    a = [[Fraction(v) for v in row] for row in q.gram]
    m = [[Fraction(int(i == j)) for j in range(r)] for i in range(r)]
    d = []
    for i in range(r):
        piv = a[i][i]
        if piv <= 0:
            raise NotPositiveDefinite(f"pivot {i} is {piv}")
        d.append(piv)
        for j in range(i + 1, r):
            m[i][j] = a[i][j] / piv
        for k in range(i + 1, r):
            for l in range(i + 1, r):
                a[k][l] -= a[k][i] * a[i][l] / piv
    return CholeskyData(tuple(d), tuple(tuple(row) for row in m))


def estimated_point_count(q, bound):
    """Volume of the ellipsoid ``Q(x) <= bound``, a proxy for enumeration cost."""
    r = q.rank
    if r == 0:
        return 1.0
    det_s = q.disc / 2.0**r
    vol = math.pi ** (r / 2) / math.gamma(r / 2 + 1) * float(bound) ** (r / 2) / math.sqrt(det_s)
    return vol + 1.0


def _check_budget(q, bound, max_vectors):
    est = estimated_point_count(q, bound)
    if max_vectors is not None and est > max_vectors:
        raise ResourceLimitExceeded(
            f"enumerating Q(x) <= {bound} visits about {est:.3g} points, over the budget {max_vectors:.3g}"
        )


@dataclass(frozen=True)
class ThetaSeries:
    form: QuadraticForm
    precision: int
    coefficients: np.ndarray

    def __getitem__(self, n):
        return int(self.coefficients[n])

    def represented(self):
        return self.coefficients > 0


def theta_series(q, bound, max_vectors=DEFAULT_MAX_VECTORS):
    """Exact coefficients r_Q(0..bound) from a single enumeration of the ellipsoid."""
    bound = int(bound)
    if bound < 0:
        raise ValueError("precision must be nonnegative")
    if q.rank == 0:
        coeffs = np.zeros(bound + 1, dtype=np.int64)
        coeffs[0] = 1
    else:
        _check_budget(q, bound, max_vectors)
        coeffs = _enum.theta_counts(q.matrix, bound)
    coeffs.setflags(write=False)
    return ThetaSeries(q, bound, coeffs)


def representations(q, n, max_vectors=DEFAULT_MAX_VECTORS):
    """All integer vectors ``x`` with ``Q(x) = n`` as a list of tuples."""
    n = int(n)
    if n < 0:
        return []
    if q.rank == 0:
        return [()] if n == 0 else []
    _check_budget(q, n, max_vectors)
    vecs, _ = _enum.vectors_up_to(q.matrix, n, lo_norm=n)
    return [tuple(int(v) for v in row) for row in vecs]


def count_representations(q, n):
    """r_Q(n) for one value of n (no table, no vector list)."""
    if q.rank == 0:
        return 1 if n == 0 else 0
    return _enum.count_norm(q.matrix, n)


def partial_sum(q, x):
    """Sum of r_Q(n) over 0 <= n <= x."""
    return int(theta_series(q, int(x)).coefficients.sum())


def partial_sum_bound(q, x):
    """Box bound prod_i (2 sqrt(x / q_i) + 1) where q_i are the Cholesky coefficients of Q itself."""
    ch = cholesky(q)
    out = 1.0
    for a in ch.diag:
        out *= 2.0 * math.sqrt(x / (float(a) / 2.0)) + 1.0
    return out


_TERM = re.compile(r"([+-]?)(\d*)\*?((?:[a-z](?:\^2|²)?\*?)+)")


def parse_polynomial(text):
    """Parse a polynomial like ``x^2+3y^2+xy-2zw`` over the variables x, y, z, w, v."""
    s = text.replace("−", "-").replace("·", "*").replace(" ", "").lower()
    if not s:
        raise ParseError("empty polynomial")
    coeffs = {}
    pos = 0
    max_var = -1
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"cannot parse term at position {pos} of {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        if pos > 0 and not m.group(1):
            raise ParseError(f"missing operator at position {pos} of {text!r}")
        c = sign * (int(m.group(2)) if m.group(2) else 1)
        mono = m.group(3).replace("*", "")
        idx = []
        for vm in re.finditer(r"([a-z])(\^2|²)?", mono):
            name = vm.group(1)
            if name not in VARIABLES:
                raise ParseError(f"unknown variable {name!r}; use x, y, z, w, v")
            i = VARIABLES.index(name)
            idx.extend([i, i] if vm.group(2) else [i])
        if len(idx) != 2:
            raise ParseError(f"term {m.group(0)!r} is not quadratic")
        key = tuple(sorted(idx))
        coeffs[key] = coeffs.get(key, 0) + c
        max_var = max(max_var, *idx)
        pos = m.end()
    r = max_var + 1
    g = [[0] * r for _ in range(r)]
    for (i, j), c in coeffs.items():
        if i == j:
            g[i][i] += 2 * c
        else:
            g[i][j] += c
            g[j][i] += c
    return g


def parse_form(text):
    """Parse a form literal: JSON ``{"gram": ...}`` or a polynomial string."""
    if isinstance(text, QuadraticForm):
        return text
    if isinstance(text, dict):
        return validate_gram(text["gram"])
    if isinstance(text, (list, tuple)):
        return validate_gram(text)
    t = text.strip()
    if t.startswith("{"):
        try:
            obj = json.loads(t)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON form literal: {exc}") from exc
        if "gram" not in obj:
            raise ParseError("JSON form literal needs a 'gram' key")
        return validate_gram(obj["gram"])
    if t.startswith("["):
        return validate_gram(json.loads(t))
    if t in ("0", "empty", ""):
        return QuadraticForm.empty()
    return validate_gram(parse_polynomial(t))
