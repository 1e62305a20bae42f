"""Rankin-Selberg bounds for the cusp part of a quaternary theta series.

The chain is: dual cusp coefficients -> explicit Petersson norm with
certified tails -> newform norm lower bound -> cusp constant C_Q -> the F_4
threshold, and finally the finite list of squarefree candidates below it.
"""

from dataclasses import asdict, dataclass, field
import bisect
import math

import numpy as np
from sympy import prevprime

from .arith import (
    core_discriminant,
    factor,
    is_fundamental_discriminant,
    is_squarefree,
    num_divisors,
    omega,
    prime_divisors,
    prime_sieve,
)
from .bessel import bessel_k01
from .errors import InvalidCharacter, NonFundamentalDiscriminant, NotSquarefree, SmallLevel, TailDominates, WrongRank
from .forms import dual_form, theta_series
from .local import eisenstein_coefficients, eisenstein_lower_constant

PSI_ZERO = -3.0 / (2.0 * math.pi**2)
PSI_SUM_LIMIT = 3.0 / (4.0 * math.pi**2)
DEFAULT_TRUNCATION = 15
ADJOINT_D = 8.35176e-3
DIVISOR_SQUARE_CONSTANT = 7.0609  # d(n)^2 <= 7.0609 n^(3/4)
D32_SUM_CONSTANT = 1.000012  # sum_d d^(3/2) e^(-4 pi d y) <= 1.000012 e^(-4 pi y) for y >= sqrt(15)


# ---------------------------------------------------------------- psi and friends

def psi(x):
    """-(6/pi) x K1(4 pi x) + 24 x^2 K0(4 pi x), vectorized; x > 0."""
    x = np.asarray(x, dtype=np.float64)
    k0, k1 = bessel_k01(4.0 * np.pi * x)
    out = -(6.0 / np.pi) * x * k1 + 24.0 * x * x * k0
    return out if out.ndim else float(out)


def psi_upper(x):
    """Majorant 6 sqrt(2) x^(3/2) exp(-4 pi x) of psi, from K0(y) <= sqrt(pi/2y) e^(-y)."""
    x = np.asarray(x, dtype=np.float64)
    return 6.0 * math.sqrt(2.0) * x**1.5 * np.exp(-4.0 * np.pi * x)


def psi_hat(y):
    """Fourier transform of the even extension of psi."""
    y = np.asarray(y, dtype=np.float64)
    return -9.0 * y * y / (np.pi**2 * (4.0 + y * y) ** 2.5)


def geometric_d2_tail(a, c):
    """sum_{d >= a} d^2 exp(-c d) in closed form (a >= 1, c > 0)."""
    ec = math.expm1(c)
    return math.exp(-c * (a - 1)) * (2.0 + ec + 2.0 * a * ec + a * a * ec * ec) / ec**3


def psi_sum(x, cutoff=60.0):
    """(sum_{d >= 1} psi(d x), tail bound) with the sum truncated where 4 pi d x > cutoff."""
    if x <= 0:
        raise ValueError("psi_sum needs x > 0")
    dmax = max(1, int(cutoff / (4.0 * math.pi * x)) + 1)
    d = np.arange(1, dmax + 1, dtype=np.float64)
    vals = psi(d * x)
    a = dmax + 1
    # psi(t) <= 6 sqrt(2) t^(3/2) e^(-4 pi t) <= 6 sqrt(2) x^(3/2) d^2 e^(-4 pi d x)
    tail = 6.0 * math.sqrt(2.0) * x**1.5 * geometric_d2_tail(a, 4.0 * math.pi * x)
    return float(math.fsum(vals)), tail


# ---------------------------------------------------------------- Rankin-Selberg coefficients

def rs_coefficients(a, level, bound):
    """b(n) = sum over n = m d^2 of 2^omega(gcd(m, N)) a(m)^2 / m, for 1 <= n <= bound.

    ``a`` is indexable with a[m] for 1 <= m <= bound; returns a float array
    indexed from 0 (b[0] = 0).
    """
    b = np.zeros(bound + 1)
    for m in range(1, bound + 1):
        am = float(a[m])
        if am == 0.0:
            continue
        w = 2 ** omega(math.gcd(m, level))
        val = w * am * am / m
        d = 1
        while m * d * d <= bound:
            b[m * d * d] += val
            d += 1
    return b


def gamma0_index(level):
    """[SL_2(Z) : Gamma_0(N)] = N prod_{p | N} (1 + 1/p)."""
    out = level
    for p in prime_divisors(level):
        out = out // p * (p + 1)
    return out


@dataclass
class DualCusp:
    level: int
    bound: int
    theta: np.ndarray
    eisenstein: list
    cusp: list  # exact Fractions a_{C*}(n)

    def as_float(self):
        return np.array([float(c) for c in self.cusp])


def _check_fundamental(q):
    if q.rank != 4:
        raise WrongRank("the analytic pipeline needs a quaternary form")
    if not is_fundamental_discriminant(q.disc):
        raise NonFundamentalDiscriminant(f"discriminant {q.disc} is not fundamental")


def dual_cusp_coefficients(q, bound=None):
    """a_{C*}(n) = r_{Q*}(n) - a_{E*}(n) for 0 <= n <= bound (default 15N), exactly."""
    _check_fundamental(q)
    n_level = q.level
    bound = bound if bound is not None else DEFAULT_TRUNCATION * n_level
    qs = dual_form(q)
    th = theta_series(qs, bound).coefficients
    eis = eisenstein_coefficients(qs, bound)
    cusp = [int(th[n]) - eis[n] for n in range(bound + 1)]
    return DualCusp(n_level, bound, th, eis, cusp)


# ---------------------------------------------------------------- Petersson norm

@dataclass
class PeterssonBound:
    level: int
    truncation: int
    index: int
    explicit: float  # sum over n d^2 <= truncation, before dividing by the index
    inner_tail: float  # n <= truncation, n d^2 > truncation
    rounding: float  # accumulated floating error estimate
    c1: float  # <C*,C*> <= c1 + c2 C_{Q*}^2
    c2: float
    lo: float | None = None  # interval for <C, C> once C_{Q*} is resolved
    hi: float | None = None

    def star_interval(self, cstar_sq):
        lo = (self.explicit - self.rounding) / self.index
        return lo, self.c1 + self.c2 * cstar_sq

    def resolve(self, cstar_sq):
        lo, hi = self.star_interval(cstar_sq)
        self.lo, self.hi = self.level * lo, self.level * hi
        return self.lo, self.hi


def _large_n_integral(level, k):
    """(1 + 1/T)^(3/2) * integral_T^inf x^(3/2) exp(-4 pi sqrt(x/N)) dx with T = k N, closed form."""
    a = math.sqrt(k)
    b = 4.0 * math.pi
    poly = a**4 / b + 4 * a**3 / b**2 + 12 * a**2 / b**3 + 24 * a / b**4 + 24 / b**5
    integral = 2.0 * level**2.5 * math.exp(-b * a) * poly
    return (1.0 + 1.0 / (k * level)) ** 1.5 * integral


def petersson_norm_C(q, truncation_factor=DEFAULT_TRUNCATION, dual=None):
    """Certified pieces of <C, C> = N <C*, C*> for a fundamental-discriminant quaternary."""
    _check_fundamental(q)
    level = q.level
    t = truncation_factor * level
    if dual is None or dual.bound < t:
        dual = dual_cusp_coefficients(q, t)
    a = dual.as_float()[: t + 1]
    idx = gamma0_index(level)
    ns = np.flatnonzero(a)
    ns = ns[ns > 0]
    w = np.array([2 ** omega(math.gcd(int(n), level)) for n in ns], dtype=np.float64)
    coef = w * a[ns] ** 2 / ns
    # explicit part: all (n, d) with n d^2 <= T
    dmax = np.array([math.isqrt(t // int(n)) for n in ns], dtype=np.int64)
    rows = np.repeat(np.arange(len(ns)), dmax)
    starts = np.repeat(np.cumsum(dmax) - dmax, dmax)
    ds = np.arange(len(rows)) - starts + 1
    xs = ds * np.sqrt(ns[rows] / level)
    terms = coef[rows] * psi(xs)
    explicit = math.fsum(terms)
    rounding = 1e-12 * float(np.sum(np.abs(terms))) + 1e-16 * len(terms)
    # inner tail: d >= a_n = isqrt(T // n) + 1, using d^(3/2) <= d^2 (n/T)^(1/4)
    inner = 0.0
    for n, cf, dm in zip(ns.tolist(), coef.tolist(), dmax.tolist()):
        c = 4.0 * math.pi * math.sqrt(n / level)
        pre = 6.0 * math.sqrt(2.0) * n / (level**0.75 * t**0.25)
        inner += cf * pre * geometric_d2_tail(dm + 1, c)
    inner *= 1.0 + 1e-12
    c1 = (explicit + rounding + inner) / idx
    const = 6.0 * math.sqrt(2.0) * DIVISOR_SQUARE_CONSTANT * D32_SUM_CONSTANT
    assert const <= 60.0
    c2 = 60.0 * 2 ** omega(level) / (level**0.75 * idx) * _large_n_integral(level, truncation_factor)
    return PeterssonBound(level, t, idx, explicit, inner, rounding, c1, c2)


# ---------------------------------------------------------------- newform norms

def zero_free_beta(level):
    """1 - (5 - 2 sqrt 6) / (4 log N - 11): no real zero of L(Ad^2 f, s) beyond it."""
    if level < 44:
        raise SmallLevel(f"the zero-free region needs N >= 44, got {level}")
    return 1.0 - (5.0 - 2.0 * math.sqrt(6.0)) / (4.0 * math.log(level) - 11.0)


@dataclass(frozen=True)
class AdjointBound:
    level: int
    beta: float
    c: float
    A: float
    x: float
    optimized: float
    fallback: float
    value: float
    flagged: bool = False


def optimal_exponent(level, beta, c, d=ADJOINT_D):
    ln = math.log(level)
    return (4.0 - (math.log(1.0 - beta) + math.log(c) - math.log(d) - math.log(2.5)) / ln) / (beta + 1.5)


def adjoint_lower_bound(level):
    """Lower bound for L(Ad^2 f, 1) over non-CM newforms of level N.

    Takes the larger of 1/(26 log N) and the bound optimized in the exponent A
    (with c = 1.64 when N^A >= 330775, c = 1.6 when 3989 <= N^A < 330775).
    Levels below 167 get the fallback with ``flagged`` set.
    """
    fallback = 1.0 / (26.0 * math.log(level))
    if level < 167:
        beta = zero_free_beta(level) if level >= 44 else float("nan")
        return AdjointBound(level, beta, float("nan"), float("nan"), float("nan"), float("nan"), fallback, fallback, True)
    beta = zero_free_beta(level)
    ln = math.log(level)
    best = None
    for c, lo_x, hi_x in ((1.64, 330775.0, math.inf), (1.6, 3989.0, 330775.0)):
        a_opt = optimal_exponent(level, beta, c)
        # keep A inside the range where this c is valid
        a_lo, a_hi = math.log(lo_x) / ln, math.log(hi_x) / ln
        a_use = min(max(a_opt, a_lo), a_hi)
        val = (1.0 - beta) * (c * level ** (-a_use * (1.0 - beta)) - ADJOINT_D * level ** (4.0 - 2.5 * a_use))
        if best is None or val > best[0]:
            best = (val, c, a_use)
    val, c, a_use = best
    return AdjointBound(level, beta, c, a_use, level**a_use, val, fallback, max(val, fallback))


def newform_petersson_lower(level):
    """B with <g, g> >= B for non-CM newforms: L(Ad^2 g, 1) * 3 / (8 pi^4 prod_{p | N} (1 + 1/p))."""
    adj = adjoint_lower_bound(level)
    prod = 1.0
    for p in prime_divisors(level):
        prod *= 1.0 + 1.0 / p
    return adj.value * 3.0 / (8.0 * math.pi**4 * prod)


# ---------------------------------------------------------------- dimensions

def _lambda(r, s, p):
    if 2 * s <= r:
        if r % 2 == 0:
            return p ** (r // 2) + p ** (r // 2 - 1)
        return 2 * p ** ((r - 1) // 2)
    return 2 * p ** (r - s)


def dim_s2(level, chi_disc=1):
    """dim S_2(Gamma_0(N), chi) for the quadratic character of discriminant ``chi_disc``.

    Cohen-Oesterle formula in weight 2; ``chi_disc = 1`` is the trivial character.
    """
    if chi_disc % 4 not in (0, 1) or chi_disc == 0:
        raise InvalidCharacter(f"{chi_disc} is not a discriminant")
    f = abs(core_discriminant(chi_disc)) if chi_disc != 1 else 1
    if chi_disc != 1 and core_discriminant(chi_disc) == 1:
        f = 1
    if level % f:
        raise InvalidCharacter(f"conductor {f} does not divide N = {level}")
    core = core_discriminant(chi_disc) if f > 1 else 1
    if core < 0:
        raise InvalidCharacter("weight 2 needs an even character (positive discriminant)")

    def chi(x):
        if math.gcd(x, level) != 1:
            return 0
        if core == 1:
            return 1
        from .arith import kronecker

        return kronecker(core, x)

    mu = gamma0_index(level)
    lam = 1
    for p, r in factor(level):
        s = 0
        g = f
        while g % p == 0:
            g //= p
            s += 1
        lam *= _lambda(r, s, p)
    xs = np.arange(level, dtype=np.int64)
    sum4 = sum(chi(int(x)) for x in np.flatnonzero((xs * xs + 1) % level == 0))
    sum3 = sum(chi(int(x)) for x in np.flatnonzero((xs * xs + xs + 1) % level == 0))
    from fractions import Fraction

    val = Fraction(mu, 12) - Fraction(lam, 2) - Fraction(sum4, 4) - Fraction(sum3, 3)
    if f == 1:
        val += 1
    if val.denominator != 1:
        raise ArithmeticError("dimension formula returned a non-integer")
    return int(val)


# ---------------------------------------------------------------- cusp constant and F4

@dataclass
class CuspConstantCertificate:
    level: int
    chi_disc: int
    u: int
    beta: float
    A: float
    c: float
    B: float
    c1: float
    c2: float
    cstar: float
    C_Q: float
    C_E: str  # exact rational as text
    F: float
    petersson_lo: float
    petersson_hi: float
    cm_caveat: bool = True
    max_candidate: int | None = None
    omega_cap: int | None = None
    candidate_count: int | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def recompute_CQ(self):
        """Forward recomputation of C_Q from (u, B, c1, c2)."""
        cstar_sq = self.u * self.c1 / (self.B - self.u * self.c2)
        return math.sqrt(self.level) * math.sqrt(cstar_sq)


def cusp_constant(q, truncation_factor=DEFAULT_TRUNCATION, with_candidates=True, dual=None):
    """Certificate C_Q, C_E and the F_4 threshold for a fundamental-discriminant quaternary."""
    _check_fundamental(q)
    level = q.level
    chi_disc = q.character_disc
    u = dim_s2(level, chi_disc)
    adj = adjoint_lower_bound(level)
    b = newform_petersson_lower(level)
    pet = petersson_norm_C(q, truncation_factor, dual)
    denom = b - u * pet.c2
    if denom <= 0:
        raise TailDominates("the large-n tail dominates the newform bound; raise the truncation")
    cstar_sq = u * pet.c1 / denom
    lo, hi = pet.resolve(cstar_sq)
    cq = math.sqrt(level) * math.sqrt(cstar_sq)
    ce = eisenstein_lower_constant(q)
    f_val = cq / float(ce)
    cert = CuspConstantCertificate(
        level, chi_disc, u, adj.beta, adj.A, adj.c, b, pet.c1, pet.c2, math.sqrt(cstar_sq), cq, str(ce), f_val, lo, hi,
        provenance={
            "u": "Cohen-Oesterle dimension of S_2(Gamma_0(N), chi)",
            "B": "adjoint L-value lower bound times 3/(8 pi^4 prod(1+1/p))",
            "c1": "explicit Rankin-Selberg sum over n d^2 <= T plus closed-form d-tail",
            "c2": "large-n tail via a(n) <= C d(n) sqrt(n) and d(n)^2 <= 7.0609 n^(3/4)",
            "C_Q": "sqrt(N) * sqrt(u c1 / (B - u c2))",
            "C_E": "normalizer times minimum normalized local densities over odd squarefree classes",
            "F": "C_Q / C_E",
        },
    )
    if with_candidates:
        cert.omega_cap = f4_omega_cap(f_val, level, chi_disc)
        cert.max_candidate = f4_max_candidate(f_val, level, chi_disc)
    return cert


def _chi_prime(chi_disc, p):
    """Kronecker symbol (D/p) for an odd prime p."""
    r = chi_disc % p
    if r == 0:
        return 0
    return 1 if pow(r, (p - 1) // 2, p) == 1 else -1


def prime_multiplier(p, chi_disc, level=0):
    """F_4 factor of an odd prime: sqrt(p)/2, times (p-1)/(p+1) when chi(p) = -1 and p does not divide ``level``."""
    m = math.sqrt(p) / 2.0
    if (not level or level % p) and _chi_prime(chi_disc, p) == -1:
        m *= (p - 1) / (p + 1)
    return m


def f4_value(n, level, chi_disc):
    """sqrt(n)/d(n) times prod over p | n, p not dividing N, chi(p) = -1 of (p-1)/(p+1)."""
    if n < 1 or not is_squarefree(n):
        raise NotSquarefree(f"{n} is not a positive squarefree integer")
    val = math.sqrt(n) / num_divisors(n)
    for p in prime_divisors(n):
        if level % p and p > 2 and _chi_prime(chi_disc, p) == -1:
            val *= (p - 1) / (p + 1)
    return val


def f4_threshold(cert):
    return cert.F


def _mlow(p):
    return math.sqrt(p) / 2.0 * (p - 1) / (p + 1)


def _sub_one_product(chi_disc, level=0, primes=(3, 5, 7)):
    out = 1.0
    for p in primes:
        m = prime_multiplier(p, chi_disc, level)
        if m < 1:
            out *= m
    return out


def _prime_cap(F, chi_disc, level=0):
    """Largest prime that can divide a candidate: m(p) * (sub-1 multipliers) <= F."""
    r = F / _sub_one_product(chi_disc, level)
    # m(p) >= mlow(p) ~ sqrt(p)/2 (1 - 2/(p+1)); solve generously
    cap = int((2.0 * r) ** 2 * 1.01) + 10
    while _mlow(cap) <= r:
        cap = int(cap * 1.1) + 10
    return cap


def f4_candidates(F, level, chi_disc, limit=None):
    """Odd squarefree n (ascending primes DFS order) with F_4(n) <= F; optionally n <= limit.

    Complete and duplicate free: every prime beyond 7 has multiplier >= 1, so
    a partial product can only shrink again through 3, 5 or 7, which are
    accounted for by multiplying with the remaining sub-1 multipliers.
    """
    cap = _prime_cap(F, chi_disc, level)
    if limit is not None:
        cap = min(cap, limit)
    primes = [int(p) for p in prime_sieve(cap) if p > 2]
    mult = [prime_multiplier(p, chi_disc, level) for p in primes]
    low = [_mlow(p) for p in primes]
    # future[i]: product of sub-1 multipliers among primes[i:]
    future = [1.0] * (len(primes) + 1)
    for i in range(len(primes) - 1, -1, -1):
        future[i] = future[i + 1] * min(mult[i], 1.0)
    eps = 1e-12
    if F + eps >= 1.0:
        yield 1
    stack = [(1, 1.0, 0)]
    while stack:
        n, val, start = stack.pop()
        for j in range(start, len(primes)):
            p = primes[j]
            if limit is not None and n * p > limit:
                break
            if val * low[j] * future[j + 1] > F + eps:
                break
            nv = val * mult[j]
            if nv * future[j + 1] > F + eps:
                continue
            m = n * p
            if nv <= F + eps:
                yield m
            stack.append((m, nv, j + 1))


def f4_omega_cap(F, level, chi_disc):
    """Largest k such that some k odd primes have multiplier product <= F."""
    cap = _prime_cap(F, chi_disc, level)
    vals = []
    for p in prime_sieve(min(cap, 10**6)):
        if p == 2:
            continue
        vals.append(prime_multiplier(int(p), chi_disc, level))
        if _mlow(int(p)) > F:
            break
    vals.sort()
    prod = 1.0
    k = 0
    for v in vals:
        prod *= v
        if prod > F:
            break
        k += 1
    return k


def _largest_last_prime(R, after, chi_disc, table=None, level=0):
    """Largest prime q > after with m(q) <= R, or None.

    ``table`` is an optional ascending list of odd primes; it is used instead
    of sympy's prevprime whenever it reaches past the search window.
    """
    if R <= 0:
        return None
    split_cap = int(4.0 * R * R)
    while split_cap > 2 and math.sqrt(split_cap) / 2.0 > R:
        split_cap -= 1
    # inert primes are allowed up to the root of sqrt(q)/2 (q-1)/(q+1) = R
    hi = split_cap + 1
    while _mlow(hi) <= R:
        hi = int(hi * 1.0001) + 2
    lo = max(after, 2)
    if table is not None and table and hi <= table[-1]:
        i = bisect.bisect_right(table, hi) - 1
        while i >= 0 and table[i] > lo:
            q = table[i]
            if q <= split_cap or _chi_prime(chi_disc, q) == -1:
                if prime_multiplier(q, chi_disc, level) <= R:
                    return q
            i -= 1
        return None
    q = hi + 1
    while True:
        q = prevprime(q) if q > 3 else 2
        if q <= lo:
            return None
        if q <= split_cap or _chi_prime(chi_disc, q) == -1:
            if prime_multiplier(q, chi_disc, level) <= R:
                return q


def f4_max_candidate(F, level, chi_disc):
    """Largest odd squarefree n with F_4(n) <= F, by branch and bound.

    Any candidate has at most one prime above P (two such primes already
    exceed F), so the search extends products of small primes and closes each
    branch with the largest admissible final prime.  A branch with budget R
    and last prime p is discarded when n R^2 (4/rho)^j cannot beat the best,
    where j bounds the number of further primes and rho = (p'-1)/(p'+1) for
    the next prime p'.
    """
    sub = _sub_one_product(chi_disc, level)
    big = 2.0 * math.sqrt(F / sub) * 1.01
    p_cap = int(big * big) + 100
    while _mlow(p_cap) ** 2 * sub <= F:
        p_cap *= 2
    primes = [int(p) for p in prime_sieve(p_cap) if p > 2]
    mult = [prime_multiplier(p, chi_disc, level) for p in primes]
    low = [_mlow(p) for p in primes]
    log_low_prefix = np.concatenate([[0.0], np.cumsum(np.log(low))])
    future = [1.0] * (len(primes) + 1)
    for i in range(len(primes) - 1, -1, -1):
        future[i] = future[i + 1] * min(mult[i], 1.0)

    def jmax(start, R):
        # largest j with prod_{k < j} low[start + k] <= R; lows exceed 1 from 11 on
        if R <= 0:
            return 0
        lr = math.log(R) + 1e-12
        if start >= 3:
            target = log_low_prefix[start] + lr
            return bisect.bisect_right(log_low_prefix, target, lo=start) - 1 - start
        best_j = 0
        for j in range(1, len(primes) - start + 1):
            s = log_low_prefix[start + j] - log_low_prefix[start]
            if s <= lr:
                best_j = j
            elif start + j > 3:
                break
        return best_j

    best = 1
    stack = [(1, 1.0, 0)]
    eps = 1e-12
    while stack:
        n, val, start = stack.pop()
        R = F / val
        last = primes[start - 1] if start > 0 else 2
        q = _largest_last_prime(R * (1 + eps), last, chi_disc, primes, level)
        if q is not None and n * q > best:
            best = n * q
        for j in range(start, len(primes)):
            if val * low[j] * future[j + 1] > F + eps:
                break
            nv = val * mult[j]
            if nv * future[j + 1] > F + eps:
                continue
            r2 = F / nv
            if j + 1 < len(primes):
                rho = (primes[j + 1] - 1) / (primes[j + 1] + 1)
                jm = jmax(j + 1, r2)
                ub = n * primes[j] * max(1.0, r2 * r2 * (4.0 / (rho * rho)) ** jm) * 1.0001
                if ub < best:
                    continue
            stack.append((n * primes[j], nv, j + 1))
    return best


def certificate_ratios(q, bound=5000):
    """Arrays (n, |a_C(n)| / (d(n) sqrt(n))) for 1 <= n <= bound."""
    th = theta_series(q, bound).coefficients
    eis = eisenstein_coefficients(q, bound)
    n = np.arange(1, bound + 1)
    cusp = np.abs(np.array([float(int(th[k]) - eis[k]) for k in n]))
    d = np.array([num_divisors(int(k)) for k in n], dtype=np.float64)
    return n, cusp / (d * np.sqrt(n))


def certificate_audit(q, cq, bound=5000):
    """Check a_C(n) <= C_Q d(n) sqrt(n) for 1 <= n <= bound; returns the worst ratio."""
    _, r = certificate_ratios(q, bound)
    return float(r.max()) / cq
