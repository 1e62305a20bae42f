"""p-adic invariants, local representability and exact local densities.

Densities are computed by a Hensel-type recursion on the Gram matrix.  For a
form with Gram ``G`` and a prime ``p`` the solutions of ``Q(x) = n`` over Z_p
split into those whose gradient ``G x`` has minimal possible valuation (they
lift uniformly, so counting them modulo a small power of ``p`` suffices) and
those lying in the sublattice ``{x : G x = 0 mod p}``, on which the form is
divisible by ``p`` and the recursion continues with a smaller ``n``.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import itertools
import math

import numpy as np

from .arith import (
    bernoulli2_character,
    factor_with_sieve,
    smallest_prime_factor_sieve,
    core_discriminant,
    factor,
    is_fundamental_discriminant,
    kronecker,
    legendre,
    prime_divisors,
    unit_part,
    valuation,
)
from .errors import WrongRank
from .forms import QuadraticForm, cholesky
from .lattice import hermite_basis

INF = "inf"


# ---------------------------------------------------------------- Hilbert symbol

def _squarefree_int(x):
    """An integer in the same rational square class as the nonzero rational ``x``."""
    x = Fraction(x)
    return x.numerator * x.denominator


def hilbert_symbol(a, b, p):
    """Hilbert symbol (a, b)_p for nonzero rationals; ``p`` a prime or ``"inf"``."""
    a, b = _squarefree_int(a), _squarefree_int(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    if p == INF or p == math.inf:
        return -1 if (a < 0 and b < 0) else 1
    alpha, u = valuation(a, p), unit_part(a, p)
    beta, v = valuation(b, p), unit_part(b, p)
    if p == 2:
        def eps(t):
            return ((t - 1) // 2) % 2

        def omg(t):
            return ((t * t - 1) // 8) % 2

        e = eps(u % 8) * eps(v % 8) + alpha * omg(v % 8) + beta * omg(u % 8)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * legendre(u, p) ** beta * legendre(v, p) ** alpha


def rational_diagonal(q):
    """Coefficients ``d_i`` with ``Q`` equivalent over Q to ``sum d_i y_i^2``."""
    return [a / 2 for a in cholesky(q).diag]


def epsilon_invariant(q, p):
    """Hasse invariant prod_{i<j} (d_i, d_j)_p of a rational diagonalization."""
    d = rational_diagonal(q)
    out = 1
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            out *= hilbert_symbol(d[i], d[j], p)
    return out


def _is_padic_square(x, p):
    x = Fraction(x)
    if p == INF:
        return x > 0
    v = valuation(x, p)
    if v % 2:
        return False
    u = unit_part(x.numerator, p) * unit_part(x.denominator, p)
    if p == 2:
        return u % 8 == 1
    return legendre(u, p) == 1


def is_anisotropic(q, p):
    """True when ``Q(x) = 0`` has only the trivial solution over Q_p."""
    r = q.rank
    if p == INF:
        return True  # positive definite
    d = rational_diagonal(q)
    det = math.prod(d, start=Fraction(1))
    eps = epsilon_invariant(q, p)
    if r == 1:
        return True
    if r == 2:
        return not _is_padic_square(-det, p)
    if r == 3:
        return eps != hilbert_symbol(-1, -det, p)
    if r == 4:
        return _is_padic_square(det, p) and eps == -hilbert_symbol(-1, -1, p)
    return False


# ---------------------------------------------------------------- Jordan splitting

@dataclass(frozen=True)
class JordanBlock:
    scale: int
    kind: str  # "unit" for a 1x1 block, "H" for [[0,1],[1,0]], "E" for [[2,1],[1,2]]
    unit: int  # odd p: Legendre symbol of the unit; p = 2: the unit mod 8; 0 for H/E


@dataclass(frozen=True)
class JordanSplitting:
    prime: int
    blocks: tuple

    def scales(self):
        out = []
        for b in self.blocks:
            out.extend([b.scale] * (1 if b.kind == "unit" else 2))
        return tuple(out)


def _vp(x, p):
    return valuation(x, p) if x != 0 else math.inf


def jordan_splitting(q, p):
    """Jordan decomposition over Z_p of the bilinear lattice with Gram ``A``.

    Scales are exponents of the Gram matrix entries, so ``x^2`` (Gram ``[2]``)
    has a 2-adic unit block of scale 1 and ``xy`` an ``H`` block of scale 0.
    """
    g = [[Fraction(v) for v in row] for row in q.gram]
    blocks = []
    while g:
        n = len(g)
        vmin = min(_vp(g[i][j], p) for i in range(n) for j in range(n))
        diag = [i for i in range(n) if _vp(g[i][i], p) == vmin]
        if diag or p != 2:
            if diag:
                i = diag[0]
            else:
                # odd p, minimum only off the diagonal: x_i -> x_i + x_j
                i, j = next((i, j) for i in range(n) for j in range(n) if i != j and _vp(g[i][j], p) == vmin)
                for k in range(n):
                    g[i][k] += g[j][k]
                for k in range(n):
                    g[k][i] += g[k][j]
            piv = g[i][i]
            u = piv / Fraction(p) ** vmin
            uint = u.numerator * u.denominator
            unit = legendre(uint, p) if p != 2 else uint % 8
            blocks.append(JordanBlock(int(vmin), "unit", unit))
            rest = [k for k in range(n) if k != i]
            g = [[g[a][b] - g[a][i] * g[i][b] / piv for b in rest] for a in rest]
            continue
        i, j = next((i, j) for i in range(n) for j in range(i + 1, n) if _vp(g[i][j], p) == vmin)
        scale = Fraction(2) ** vmin
        a, b, c = g[i][i] / scale, g[i][j] / scale, g[j][j] / scale
        ac = a * c
        kind = "H" if _vp(ac, 2) >= 3 else "E"
        blocks.append(JordanBlock(int(vmin), kind, 0))
        det = g[i][i] * g[j][j] - g[i][j] ** 2
        rest = [k for k in range(n) if k not in (i, j)]
        inv = [[g[j][j] / det, -g[i][j] / det], [-g[i][j] / det, g[i][i] / det]]
        new = []
        for x in rest:
            row = []
            for y in rest:
                s = g[x][y]
                for s1, k1 in ((0, i), (1, j)):
                    for s2, k2 in ((0, i), (1, j)):
                        s -= g[x][k1] * inv[s1][s2] * g[k2][y]
                row.append(s)
            new.append(row)
        g = new
    blocks.sort(key=lambda b: (b.scale, b.kind, b.unit))
    return JordanSplitting(p, tuple(blocks))


# ---------------------------------------------------------------- local densities

def _count_ff_diagonal(coeffs, n, p):
    """#{y in F_p^t : sum c_i y_i^2 = n} for nonzero c_i, odd p (closed form)."""
    t = len(coeffs)
    n %= p
    if t == 0:
        return 1 if n == 0 else 0
    c = math.prod(coeffs) % p
    if t % 2 == 0:
        eta = legendre((-1) ** (t // 2) * c, p)
        nu = p - 1 if n == 0 else -1
        return p ** (t - 1) + nu * p ** (t // 2 - 1) * eta
    eta = legendre((-1) ** ((t - 1) // 2) * c * n, p)
    return p ** (t - 1) + p ** ((t - 1) // 2) * eta


def _diagonalize_mod_p(g, p):
    """Diagonal coefficients (mod p) of the form x^T g x / 2 over F_p, odd p; zeros dropped."""
    half = pow(2, -1, p)
    s = [[(v * half) % p for v in row] for row in g]
    out = []
    while s:
        n = len(s)
        i = next((k for k in range(n) if s[k][k] % p), None)
        if i is None:
            pair = next(((a, b) for a in range(n) for b in range(n) if a != b and s[a][b] % p), None)
            if pair is None:
                break
            a, b = pair
            for k in range(n):
                s[a][k] = (s[a][k] + s[b][k]) % p
            for k in range(n):
                s[k][a] = (s[k][a] + s[k][b]) % p
            i = a
        piv = s[i][i] % p
        inv = pow(piv, -1, p)
        out.append(piv)
        rest = [k for k in range(n) if k != i]
        s = [[(s[a][b] - s[a][i] * s[i][b] * inv) % p for b in rest] for a in rest]
    return out


def _kernel_mod_p(g, p):
    """Basis vectors (lists) of the kernel of the integer matrix g over F_p."""
    n = len(g)
    m = [[v % p for v in row] for row in g]
    pivots = []
    row = 0
    for col in range(n):
        piv = next((r for r in range(row, n) if m[r][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = pow(m[row][col], -1, p)
        m[row] = [(v * inv) % p for v in m[row]]
        for r in range(n):
            if r != row and m[r][col]:
                f = m[r][col]
                m[r] = [(a - f * b) % p for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        v = [0] * n
        v[fcol] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-m[r][fcol]) % p
        basis.append(v)
    return basis


def _sublattice_mod_p(g, p):
    """Integer basis (columns) of {x in Z^r : g x = 0 mod p} and the rank of its kernel."""
    n = len(g)
    ker = _kernel_mod_p(g, p)
    gens = ker + [[p * int(i == j) for j in range(n)] for i in range(n)]
    return hermite_basis(gens, n), len(ker)


def _transform(g, cols):
    n = len(g)
    gc = [[sum(g[i][k] * c[k] for k in range(n)) for i in range(n)] for c in cols]
    return tuple(tuple(sum(ci[k] * gc[j][k] for k in range(n)) for j in range(len(cols))) for ci in cols)


_GRIDS = {}


def _residue_grid(r, m):
    key = (r, m)
    if key not in _GRIDS:
        _GRIDS[key] = np.array(list(itertools.product(range(m), repeat=r)), dtype=np.int64)
    return _GRIDS[key]


def _count_two_adic(g, n, modulus, kernel_matrix):
    """#{x mod modulus : Q_g(x) = n mod modulus and kernel_matrix x != 0 mod 2}."""
    r = len(g)
    x = _residue_grid(r, modulus)
    a = np.array(g, dtype=object)
    half = np.array([g[i][i] // 2 for i in range(r)], dtype=object)
    # Q(x) = sum_i half_i x_i^2 + sum_{i<j} g_ij x_i x_j, evaluated mod `modulus`
    val = np.zeros(len(x), dtype=np.int64)
    for i in range(r):
        val += int(half[i] % modulus) * x[:, i] * x[:, i]
        for j in range(i + 1, r):
            val += int(a[i, j] % modulus) * x[:, i] * x[:, j]
    val %= modulus
    k = np.array([[int(v) % 2 for v in row] for row in kernel_matrix], dtype=np.int64)
    good = ((x @ k.T) % 2).any(axis=1)
    return int(np.count_nonzero((val == n % modulus) & good))


def _content_valuation(g, p):
    return min(valuation(v, p) for row in g for v in row if v != 0)


def _class_key(n, p):
    v = valuation(n, p)
    u = n // p**v
    return v, (u % 8 if p == 2 else legendre(u, p))


@lru_cache(maxsize=None)
def _raw_density_cached(g, p, v, cls):
    # canonical representative of the class (v, cls)
    if p == 2:
        u = cls
    else:
        u = 1 if cls == 1 else next(a for a in range(2, p) if legendre(a, p) == -1)
    return _raw_density(g, p, p**v * u)


def _raw_density(g, p, n):
    r = len(g)
    s = _content_valuation(g, p)
    if s > 0:
        pk = p**s
        g0 = tuple(tuple(v // pk for v in row) for row in g)
        if all(g0[i][i] % 2 == 0 for i in range(r)):
            if n % pk:
                return Fraction(0)
            return pk * raw_density_gram(g0, n // pk, p)
        # p = 2 and g / 2^s has an odd diagonal entry: Q = 2^(s-1) * x^T g0 x
        if s > 1:
            pk = 2 ** (s - 1)
            if n % pk:
                return Fraction(0)
            g1 = tuple(tuple(2 * v for v in row) for row in g0)
            return pk * raw_density_gram(g1, n // pk, 2)
        # s == 1: gradient valuation one; Hensel lifting is uniform from modulus 8
        good = _count_two_adic(g, n, 8, g0)
        dens = Fraction(good, 8 ** (r - 1))
        cols, kdim = _sublattice_mod_p(g0, 2)
    else:
        if p == 2:
            good = _count_two_adic(g, n, 2, g)
            dens = Fraction(good, 2 ** (r - 1))
        else:
            coeffs = _diagonalize_mod_p(g, p)
            kdim = r - len(coeffs)
            total = p**kdim * _count_ff_diagonal(coeffs, n, p)
            on_kernel = p**kdim if n % p == 0 else 0
            dens = Fraction(total - on_kernel, p ** (r - 1))
        cols, kdim = _sublattice_mod_p(g, p)
    index = p ** (r - kdim)
    sub = _transform(g, cols)
    return dens + raw_density_gram(sub, n, p) / index


def raw_density_gram(g, n, p):
    """Exact local density at ``p`` of ``n`` by the form with Gram ``g`` (tuple of tuples)."""
    n = int(n)
    if n <= 0:
        raise ValueError("local densities are computed for positive n")
    v, cls = _class_key(n, p)
    return _raw_density_cached(g, p, v, cls)


def raw_local_density(q, n, p):
    """Unnormalized local density: the limit of #{x mod p^k : Q(x) = n} / p^(k(r-1))."""
    return raw_density_gram(q.gram, n, p)


def _normalizer(q, p):
    """1 - chi(p) p^(-r/2) for even rank, the generic-prime density; 1 otherwise."""
    if q.rank % 2:
        return Fraction(1)
    chi = kronecker(q.character_disc, p)
    return 1 - Fraction(chi, p ** (q.rank // 2))


@dataclass(frozen=True)
class DensityValue:
    place: object
    n: int
    value: object  # Fraction for finite places, float at infinity
    raw: object = None


def local_density(q, n, p):
    """Local density at ``p``, normalized to equal 1 at generic primes for even rank.

    For even rank ``r`` the value is ``beta_p(n) / (1 - chi(p) p^(-r/2))`` so
    that it is exactly 1 for odd ``p`` not dividing ``n * disc``; for odd rank
    the unnormalized density is returned.
    """
    raw = raw_local_density(q, n, p)
    return DensityValue(p, int(n), raw / _normalizer(q, p), raw)


def stability_exponent(q, p):
    return 1 + 2 * valuation(2 * q.disc, p)


def archimedean_density(q, n):
    """pi^2 n / sqrt(D) for a quaternary form."""
    if q.rank != 4:
        raise WrongRank(f"archimedean density is defined here for rank 4, got {q.rank}")
    return math.pi**2 * n / math.sqrt(q.disc)


@lru_cache(maxsize=None)
def eisenstein_normalizer(disc):
    """The rational number 4 pi^2 / (sqrt(D) L(2, chi_D)) for a positive discriminant D.

    The Eisenstein coefficient of a quaternary form of determinant ``D`` is this
    constant times ``n`` times the product of normalized local densities at the
    primes dividing ``2 D n``.
    """
    d0 = core_discriminant(disc)
    f2 = Fraction(disc, d0)
    f = math.isqrt(int(f2))
    if f * f != f2:
        raise ValueError("discriminant is not a square multiple of its core")
    b2 = bernoulli2_character(d0)
    euler = Fraction(1)
    for p in prime_divisors(disc):
        if d0 % p:
            euler *= 1 - Fraction(kronecker(d0, p), p * p)
    return Fraction(4 * d0) / (f * b2 * euler)


def _check_quaternary(q):
    if q.rank != 4:
        raise WrongRank(f"expected a quaternary form, got rank {q.rank}")


def eisenstein_coefficient(q, n):
    """Exact Eisenstein coefficient a_E(n) of a quaternary form (a Fraction)."""
    _check_quaternary(q)
    n = int(n)
    if n == 0:
        return Fraction(1)
    primes = sorted(set(prime_divisors(2 * q.disc * n)))
    out = eisenstein_normalizer(q.disc) * n
    for p in primes:
        out *= local_density(q, n, p).value
        if out == 0:
            return Fraction(0)
    return out


def unramified_density(chi_p, v, p):
    """Normalized rank-4 density at an odd prime not dividing the discriminant.

    Equals sum_{k=0}^{v} (chi(p)/p)^k where ``v`` is the valuation of ``n``.
    """
    x = Fraction(chi_p, p)
    return sum((x**k for k in range(v + 1)), Fraction(0))


def eisenstein_coefficients(q, bound):
    """Exact a_E(n) for 0 <= n <= bound as a list of Fractions.

    Primes dividing 2D use the density recursion (memoized by square class);
    the remaining primes use the unramified closed form.
    """
    _check_quaternary(q)
    spf = smallest_prime_factor_sieve(max(bound, 2))
    bad = set(prime_divisors(2 * q.disc))
    kappa = eisenstein_normalizer(q.disc)
    chi_cache = {}
    out = [Fraction(1)] + [Fraction(0)] * bound
    for n in range(1, bound + 1):
        val = kappa * n
        fac = dict(factor_with_sieve(n, spf))
        for p in bad:
            val *= local_density(q, n, p).value
            if val == 0:
                break
        if val:
            for p, e in fac.items():
                if p in bad:
                    continue
                c = chi_cache.get(p)
                if c is None:
                    c = chi_cache[p] = kronecker(q.character_disc, p)
                val *= unramified_density(c, e, p)
        out[n] = val
    return out


def locally_represents(q, n):
    """True iff every local density of ``n`` is positive."""
    n = int(n)
    if n == 0:
        return True
    if n < 0:
        return False
    if q.rank == 0:
        return False
    primes = set(prime_divisors(2 * q.disc))
    if q.rank <= 2:
        primes |= set(prime_divisors(n))
    return all(raw_local_density(q, n, p) > 0 for p in sorted(primes))


def odd_class_representatives(p):
    """Square classes of odd squarefree integers at ``p`` as (valuation, class) pairs."""
    if p == 2:
        return [(0, u) for u in (1, 3, 5, 7)]
    return [(v, c) for v in (0, 1) for c in (1, -1)]


def _class_rep(p, v, c):
    if p == 2:
        return c
    u = 1 if c == 1 else next(a for a in range(2, p) if legendre(a, p) == -1)
    return p**v * u


def class_of(n, p):
    return _class_key(n, p)


@dataclass(frozen=True)
class SquareclassProfile:
    """Local representability of odd squarefree-type residue classes.

    ``failing`` maps each prime to the set of (valuation, class) pairs the form
    misses there; a residue ``a`` mod ``modulus`` is locally represented iff
    it avoids every failing class.
    """

    modulus: int
    failing: dict

    def flag(self, a):
        a = int(a)
        if a % 2 == 0:
            raise ValueError("profiles describe odd residues")
        for p, bad in self.failing.items():
            if p != 2 and a % (p * p) == 0:
                raise ValueError(f"residue {a} is divisible by {p}^2; class not determined")
            if class_of(a, p) in bad:
                return False
        return True

    def is_empty(self):
        return not any(self.failing.values())

    def missed_odd(self, limit):
        """Odd n <= limit (not divisible by p^2 for profiled p) that are locally missed."""
        out = []
        for a in range(1, limit + 1, 2):
            if any(p != 2 and a % (p * p) == 0 for p in self.failing):
                continue
            if not self.flag(a):
                out.append(a)
        return out

    def describe(self):
        return {str(p): sorted(list(b)) for p, b in self.failing.items() if b}


def locally_missed_classes(q):
    """Profile of odd squarefree-type classes not locally represented by ``q``."""
    primes = sorted(set(prime_divisors(2 * q.disc)))
    modulus = 8
    failing = {}
    for p in primes:
        if p != 2:
            modulus *= p * p
        bad = set()
        for v, c in odd_class_representatives(p):
            if raw_local_density(q, _class_rep(p, v, c), p) == 0:
                bad.add((v, c))
        failing[p] = frozenset(bad)
    return SquareclassProfile(modulus, failing)


def smallest_locally_missed_odd(q, limit=None):
    """Least odd positive integer not locally represented, or ``None`` when none exists."""
    prof = locally_missed_classes(q)
    if prof.is_empty():
        return None
    limit = limit or prof.modulus
    for a in range(1, limit + 1, 2):
        if not locally_represents(q, a):
            return a
    return None


def eisenstein_lower_constant(q):
    """Rational C_E with a_E(n) >= C_E n prod_{p | n, chi(p) = -1} (p-1)/(p+1).

    Valid for odd squarefree locally represented ``n``.  At primes dividing
    ``2 D`` the normalized density is minimized over the odd squarefree
    square classes; at other primes dividing ``n`` the normalized density is
    ``1 + chi(p)/p``, which is at least the displayed factor.
    """
    _check_quaternary(q)
    out = eisenstein_normalizer(q.disc)
    for p in sorted(set(prime_divisors(2 * q.disc))):
        vals = []
        for v, c in odd_class_representatives(p):
            val = local_density(q, _class_rep(p, v, c), p).value
            if val > 0:
                vals.append(val)
        out *= min(vals)
    return out


def density_audit_rows(q, n_values):
    """Rows (n, place, numerator, denominator) of the local-density product for each n."""
    rows = []
    for n in n_values:
        for p in sorted(set(prime_divisors(2 * q.disc * n))):
            val = local_density(q, n, p).value
            rows.append((n, p, val.numerator, val.denominator))
        k = eisenstein_normalizer(q.disc) * n
        rows.append((n, "normalizer*n", k.numerator, k.denominator))
    return rows


def is_fundamental(q):
    return q.character_disc is not None and is_fundamental_discriminant(q.character_disc)


def conductor_factorization(d):
    return factor(core_discriminant(d))
