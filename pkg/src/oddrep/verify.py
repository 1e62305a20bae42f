"""Finite checks that turn representation bounds into exception lists.

A form is compared against a split local cover R + d w^2, a sublattice whose
theta table is cheap to tabulate.  Anything the cover misses is re-checked by
direct enumeration in the form itself, so reported exceptions are always
genuine.
"""

from dataclasses import asdict, dataclass, field
from importlib import resources
import json
import math
import time

import numpy as np

from . import enumerate as _enum
from .analytic import cusp_constant, f4_candidates
from .arith import is_squarefree, prime_divisors, valuation
from .errors import (
    BudgetExceeded,
    NoCoverFound,
    NonFundamentalDiscriminant,
    NoRegularEmbedding,
    QueueBudgetExceeded,
    ResourceLimitExceeded,
    Unresolvable,
)
from .escalation import CONJECTURE_FORMS, ODD, TargetSet
from .forms import QuadraticForm, count_representations, parse_form, theta_series
from .lattice import embeddings, integer_kernel, is_isometric, orthogonal_complement, reduce_with_basis, represents_form, restrict
from .local import class_of, is_fundamental, locally_missed_classes, locally_represents

DEFAULT_SMALL_BOUND = 5000
DEFAULT_CLASS_SCAN = 10**6
DEFAULT_QUEUE_LIMIT = 200_000
DEFAULT_TABLE_FACTOR = 40.0
DEFAULT_T_TABLE = 20_000


@dataclass(frozen=True)
class SplitLocalCover:
    """R + d w^2 inside Q: ``cols`` are the images of R's basis and ``w`` the extra vector."""

    ternary: QuadraticForm
    d: int
    cols: tuple
    w: tuple

    @property
    def form(self):
        g = [list(row) + [0] for row in self.ternary.gram]
        g.append([0] * self.ternary.rank + [2 * self.d])
        return QuadraticForm(g)

    def index(self, q):
        return math.isqrt(self.form.disc // q.disc)

    def verify(self, q):
        cols = [list(c) for c in self.cols] + [list(self.w)]
        return restrict(q, cols).gram == self.form.gram

    def to_dict(self):
        return {"R": self.ternary.polynomial(), "d": self.d, "cols": [list(c) for c in self.cols], "w": list(self.w)}


@dataclass
class ExceptionReport:
    form: str
    method: str
    exceptions: list
    certified_through: int = None
    squarefree_complete: bool = False
    conditional: bool = False
    notes: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class RegularTernaryDB:
    """Ternary forms taken to be regular.  Regularity is trusted input, not proven here."""

    entries: tuple
    source: str

    @classmethod
    def from_lines(cls, lines, source):
        forms = []
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            f = parse_form(line)
            if f.rank != 3:
                raise ValueError(f"regular ternary entry has rank {f.rank}: {line}")
            forms.append(f)
        return cls(tuple(forms), source)

    @classmethod
    def load(cls, path=None):
        if path is None:
            text = resources.files("oddrep.data").joinpath("regular_ternaries.txt").read_text()
            return cls.from_lines(text.splitlines(), "builtin")
        with open(path) as fh:
            return cls.from_lines(fh.read().splitlines(), str(path))


def _positive_first(v):
    v = [int(x) for x in v]
    return v if next(x for x in v if x != 0) > 0 else [-x for x in v]


def _reduced_sublattice(q, basis):
    """Columns spanning the same sublattice as ``basis`` with a reduced Gram matrix."""
    _, b = reduce_with_basis(restrict(q, basis))
    n = q.rank
    return [[sum(basis[k][i] * col[k] for k in range(len(basis))) for i in range(n)] for col in b]


# ----------------------------------------------------------------------------
# split covers


def find_split_local_cover(q, max_norm=None):
    """A split cover R + d w^2 of ``q`` (rank >= 2).

    w runs over primitive short vectors and R is its orthogonal complement.
    Preference order: smallest index in ``q``, smallest disc(R), smallest d,
    then the lexicographically least reduced Gram of R.
    """
    if q.rank < 2:
        raise NoCoverFound("a split cover needs rank at least 2")
    if max_norm is None:
        max_norm = max(q.gram[i][i] for i in range(q.rank)) // 2
    vecs, norms = _enum.vectors_up_to(q.matrix, max_norm, lo_norm=1)
    best = None
    seen = set()
    for v, nm in zip(vecs.tolist(), norms.tolist()):
        w = tuple(_positive_first(v))
        if w in seen or math.gcd(*w) != 1:
            continue
        seen.add(w)
        row = [sum(w[i] * q.gram[i][j] for i in range(q.rank)) for j in range(q.rank)]
        cols = _reduced_sublattice(q, integer_kernel([row], q.rank))
        r = restrict(q, cols)
        cover = SplitLocalCover(r, int(nm), tuple(tuple(c) for c in cols), w)
        key = (cover.index(q), r.disc, int(nm), r.gram)
        if best is None or key < best[0]:
            best = (key, cover)
    if best is None:
        raise NoCoverFound(f"no vector of norm <= {max_norm} gives a split cover")
    return best[1]


def _cover_hits(rep, d, targets, w_max=None, table_max=None):
    """Boolean array: target n has some w >= 0 with n - d w^2 marked in ``rep``.

    Only remainders inside the table are tested; ``w_max`` caps w.
    """
    targets = np.asarray(targets, dtype=np.int64)
    size = len(rep) - 1 if table_max is None else table_max
    hit = np.zeros(len(targets), dtype=bool)
    todo = np.arange(len(targets))
    if len(targets) == 0:
        return hit
    top = int(targets.max())
    w_hi = math.isqrt(top // d) if w_max is None else w_max
    # start from w giving remainders in the table, for large targets
    for w in range(0, w_hi + 1):
        if len(todo) == 0:
            break
        m = targets[todo] - d * w * w
        ok = (m >= 0) & (m <= size)
        good = np.zeros(len(todo), dtype=bool)
        good[ok] = rep[m[ok]]
        hit[todo[good]] = True
        todo = todo[~good & (m >= 0)]
    return hit


def _direct_represents(q, n):
    return count_representations(q, int(n)) > 0


def check_interval(q, lo, hi, target=ODD, cover=None, budget_seconds=None):
    """Exceptions of ``q`` in ``target`` within [lo, hi], accelerated by a split cover."""
    start = time.perf_counter()
    lo, hi = max(int(lo), 1), int(hi)
    if hi < lo:
        return ExceptionReport(q.polynomial(), "interval", [], certified_through=hi)
    if cover is None:
        cover = find_split_local_cover(q)
    rep = theta_series(cover.ternary, hi).coefficients > 0
    n = np.arange(lo, hi + 1, dtype=np.int64)
    n = n[np.isin(n % target.modulus, target.residues)]
    hit = _cover_hits(rep, cover.d, n)
    misses = n[~hit]
    exc = []
    for m in misses.tolist():
        if budget_seconds is not None and time.perf_counter() - start > budget_seconds:
            raise BudgetExceeded(f"interval check ran out of time at n = {m}")
        if not _direct_represents(q, m):
            exc.append(int(m))
    return ExceptionReport(
        q.polynomial(),
        "interval",
        exc,
        certified_through=hi,
        stats={"targets": int(len(n)), "cover_misses": int(len(misses)), "cover": cover.to_dict(),
               "seconds": time.perf_counter() - start},
    )


def four_n_reformulation(q):
    """(w^2 + S) for a form with x^2 coefficient 1, using 4Q = (2x + L)^2 + S.

    ``n`` is represented by ``q`` iff ``4n`` is represented by the returned form.
    """
    a = q.gram
    if a[0][0] != 2:
        raise ValueError("the first variable must have coefficient 1")
    r = q.rank
    b = [a[0][j] for j in range(1, r)]
    # Gram of S = 4 Q_rest - L^2: entries 4 a_ij - 2 b_i b_j (diagonal 4 a_ii - 2 b_i^2)
    g = [[0] * r for _ in range(r)]
    g[0][0] = 2
    for i in range(1, r):
        for j in range(1, r):
            g[i][j] = 4 * a[i][j] - 2 * b[i - 1] * b[j - 1]
    return QuadraticForm(g)


def check_reformulated(q, bound, budget_seconds=None):
    """Odd exceptions of a form with x^2 coefficient 1 up to bound/4, via m = 4n = 4 mod 8 up to ``bound``."""
    big = four_n_reformulation(q)
    rest = QuadraticForm([row[1:] for row in big.gram[1:]])
    cover = SplitLocalCover(rest, 1, tuple(tuple(int(i == j + 1) for i in range(q.rank)) for j in range(q.rank - 1)),
                            tuple(int(i == 0) for i in range(q.rank)))
    rep = check_interval(big, 4, bound, TargetSet("4 mod 8", 8, (4,)), cover=cover, budget_seconds=budget_seconds)
    rep.form = q.polynomial()
    rep.method = "interval-4n"
    rep.exceptions = [m // 4 for m in rep.exceptions]
    return rep


# ----------------------------------------------------------------------------
# candidate sweeps


def sweep_candidates(q, cover, candidates, small_bound=DEFAULT_SMALL_BOUND, table_size=None,
                     table_factor=DEFAULT_TABLE_FACTOR, direct_limit=10**7, budget_seconds=None):
    """Exceptions among ``candidates`` (odd integers).

    Candidates up to ``small_bound`` are checked against the theta series of
    ``q`` itself.  Larger ones look for w with n - d w^2 inside a theta table
    of R; the table length defaults to ``table_factor * sqrt(max candidate)``.
    Cover misses fall back to direct enumeration when n <= ``direct_limit``
    and are reported as unresolved otherwise.
    """
    start = time.perf_counter()
    cands = np.array(sorted(int(n) for n in candidates if n % 2 == 1), dtype=np.int64)
    top = int(cands.max()) if len(cands) else 1
    small = cands[cands <= small_bound]
    large = cands[cands > small_bound]
    th_q = theta_series(q, min(top, small_bound)).coefficients
    exc = [int(n) for n in small.tolist() if th_q[n] == 0]
    unresolved = []
    cover_misses = 0
    if len(large):
        if table_size is None:
            table_size = int(table_factor * math.sqrt(top)) + small_bound
        table_size = min(table_size, top)
        rep = theta_series(cover.ternary, table_size).coefficients > 0
        for chunk in np.array_split(large, max(1, len(large) // 100_000)):
            if budget_seconds is not None and time.perf_counter() - start > budget_seconds:
                raise BudgetExceeded(f"sweep ran out of time before n = {int(chunk[0])}")
            hit = _chunk_hits(rep, cover.d, chunk, table_size)
            for n in chunk[~hit].tolist():
                cover_misses += 1
                if n <= direct_limit:
                    if not _direct_represents(q, n):
                        exc.append(int(n))
                else:
                    unresolved.append(int(n))
    notes = []
    if unresolved:
        notes.append("cover missed candidates too large for direct enumeration")
    return ExceptionReport(
        q.polynomial(),
        "sweep",
        sorted(exc),
        certified_through=None,
        squarefree_complete=False,
        notes=notes,
        stats={"candidates": int(len(cands)), "cover_misses": cover_misses, "unresolved": unresolved,
               "table_size": table_size, "seconds": time.perf_counter() - start},
    )


def _chunk_hits(rep, d, n, table_size):
    """Per target: some w with 0 <= n - d w^2 <= table_size and the remainder represented."""
    hit = np.zeros(len(n), dtype=bool)
    # smallest admissible w has n - d w^2 <= table_size
    w = np.ceil(np.sqrt(np.maximum(n - table_size, 0) / d)).astype(np.int64)
    w = np.where(n - d * w * w > table_size, w + 1, w)
    todo = np.arange(len(n))
    while len(todo):
        m = n[todo] - d * w[todo] * w[todo]
        alive = m >= 0
        good = np.zeros(len(todo), dtype=bool)
        good[alive] = rep[m[alive]]
        hit[todo[good]] = True
        todo = todo[alive & ~good]
        w[todo] += 1
    return hit


# ----------------------------------------------------------------------------
# methods


def odd_universal_ternaries():
    """The 23 ternary escalators with no odd exception up to 2^14 (bundled list)."""
    text = resources.files("oddrep.data").joinpath("odd_universal_ternaries.txt").read_text()
    return [parse_form(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]


def method1(q, ternary_db=None):
    """An odd-universal ternary of ``ternary_db`` embedded in ``q``, or None.

    Ternaries with a known proof are preferred over the conjectured ones.
    """
    db = odd_universal_ternaries() if ternary_db is None else ternary_db
    fallback = None
    for t in db:
        if represents_form(q, t) is not None:
            if not _is_conjecture_form(t):
                return t
            fallback = fallback or t
    return fallback


def _is_conjecture_form(t):
    return any(t.disc == f.disc and is_isometric(t, f) for f in (parse_form(s) for s in CONJECTURE_FORMS))


def find_regular_embedding(q, regular_db, max_embeddings=64):
    """(T, d, cols, w): a db ternary T in q with T + d w^2 locally representing every odd."""
    best = None
    for t in regular_db.entries:
        for emb in embeddings(q, t, limit=max_embeddings):
            cols = emb.columns()
            w = orthogonal_complement(q, cols)
            if len(w) != 1:
                continue
            w = _positive_first(w[0])
            d = q(w)
            cover = SplitLocalCover(t, int(d), tuple(tuple(c) for c in cols), tuple(w))
            if not locally_missed_classes(cover.form).is_empty():
                continue
            if best is None or d < best.d:
                best = cover
    if best is None:
        raise NoRegularEmbedding("no nicely embedded regular ternary in the supplied list")
    return best


def _local_modulus(t):
    """Modulus M = 8 prod_{p | disc T odd} p^2 fixing local representability of odd squarefree classes."""
    m = 8
    for p in prime_divisors(t.disc):
        if p != 2:
            m *= p * p
    return m


def _may_be_squarefree(a, m):
    if a % 2 == 0:
        return False
    for p in prime_divisors(m):
        if p != 2 and m % (p * p) == 0 and a % (p * p) == 0:
            return False
    return True


def _hit_modulus(t, m_val, base):
    """Modulus M' such that m' = m_val (mod M') forces the same local behaviour of T at bad primes."""
    out = base
    for p in prime_divisors(2 * t.disc):
        e = valuation(m_val, p) + (3 if p == 2 else 1)
        out = math.lcm(out, p**e)
    return out


def method2(q, regular_db, scan_bound=DEFAULT_CLASS_SCAN, queue_limit=DEFAULT_QUEUE_LIMIT):
    """Odd squarefree exceptions of ``q`` by the residue-class queue over a regular ternary."""
    start = time.perf_counter()
    cover = find_regular_embedding(q, regular_db)
    t, d = cover.ternary, cover.d
    prof = locally_missed_classes(t)
    m0 = _local_modulus(t)
    queue = []
    for a in range(1, m0, 2):
        if _may_be_squarefree(a, m0) and not _t_locally_represents(prof, a):
            queue.append((a, m0, a))
    table = theta_series(t, min(scan_bound, DEFAULT_T_TABLE)).coefficients > 0
    processed = 0
    cand_exc = set()
    while queue:
        a, mod, first = queue.pop()
        processed += 1
        if processed > queue_limit:
            raise QueueBudgetExceeded(f"more than {queue_limit} residue classes")
        n = first
        closed = False
        while n <= scan_bound:
            if is_squarefree(n):
                hit = _cover_value(t, d, n, table, mod)
                if hit is None:
                    cand_exc.add(n)
                else:
                    mp = hit[1]
                    for k in range(1, mp // mod):
                        b = (a + k * mod) % mp
                        nb = n + (b - n) % mp
                        if _may_be_squarefree(b, mp):
                            queue.append((b, mp, nb))
                    closed = True
                    break
            n += mod
        if not closed:
            raise QueueBudgetExceeded(f"class {a} mod {mod} not closed below {scan_bound}")
    exc = sorted(n for n in cand_exc if not _direct_represents(q, n))
    return ExceptionReport(
        q.polynomial(),
        "2",
        exc,
        squarefree_complete=True,
        notes=["regularity of the ternary is trusted input"],
        stats={"ternary": t.polynomial(), "d": d, "modulus": m0, "classes": processed,
               "cover_only_exceptions": sorted(cand_exc), "seconds": time.perf_counter() - start},
    )


def _t_locally_represents(prof, a):
    """Local representability by T of odd a (T represents everything at good primes)."""
    for p, bad in prof.failing.items():
        if p != 2 and a % (p * p) == 0:
            return True  # not squarefree-type; never queued
        if class_of(a, p) in bad:
            return False
    return True


def _cover_value(t, d, n, table, mod):
    """The T-value m = n - d w^2 > 0 represented by T with the smallest hit modulus, or None."""
    best = None
    w = 0
    while d * w * w < n:
        m = n - d * w * w
        # beyond the table regularity of T decides
        if (table[m] if m < len(table) else locally_represents(t, m)):
            mp = _hit_modulus(t, m, mod)
            if best is None or mp < best[1]:
                best = (m, mp)
                if mp == mod:
                    break
        w += 1
    return best


def method3(q, candidate_limit=None, small_bound=DEFAULT_SMALL_BOUND, cover=None, certificate=None,
            budget_seconds=None):
    """Squarefree exceptions from the cusp-constant certificate and an F_4 candidate sweep.

    With ``candidate_limit`` only candidates up to that bound are swept and
    the report is marked incomplete beyond it.
    """
    if not is_fundamental(q):
        raise NonFundamentalDiscriminant(f"discriminant {q.disc} is not fundamental")
    start = time.perf_counter()
    cert = certificate or cusp_constant(q, with_candidates=False)
    t_cert = time.perf_counter() - start
    cover = cover or find_split_local_cover(q)
    stream = f4_candidates(cert.F, cert.level, cert.chi_disc, limit=candidate_limit)
    cands = [n for n in stream if n % 2 == 1]
    rep = sweep_candidates(q, cover, cands, small_bound=small_bound, budget_seconds=budget_seconds)
    rep.method = "3"
    complete = candidate_limit is None and not rep.stats["unresolved"]
    rep.squarefree_complete = complete
    rep.certified_through = None if complete else candidate_limit
    rep.conditional = cert.cm_caveat
    rep.notes.append(f"F = {cert.F:.4f}")
    if cert.cm_caveat:
        rep.notes.append("CM newforms assumed to satisfy the same Petersson lower bound")
    rep.stats["certificate"] = cert.to_dict()
    rep.stats["certificate_seconds"] = t_cert
    return rep


@dataclass
class ReportConfig:
    regular_db: RegularTernaryDB = None
    candidate_limit: int = None
    interval_bound: int = None
    budget_seconds: float = None


def report(q, config=None):
    """Try method 1, then 2, then 3; optionally fall back to an explicit interval check."""
    config = config or ReportConfig()
    t = method1(q)
    if t is not None:
        cond = _is_conjecture_form(t)
        notes = [f"contains the odd-universal ternary {t.polynomial()}"]
        if cond:
            notes.append("conditional on the conjectured odd-universality of that ternary")
        return ExceptionReport(q.polynomial(), "1", [], squarefree_complete=True, conditional=cond, notes=notes)
    db = config.regular_db or RegularTernaryDB.load()
    try:
        return method2(q, db)
    except (NoRegularEmbedding, QueueBudgetExceeded):
        pass
    if is_fundamental(q):
        return method3(q, candidate_limit=config.candidate_limit, budget_seconds=config.budget_seconds)
    if config.interval_bound:
        rep = check_interval(q, 1, config.interval_bound, budget_seconds=config.budget_seconds)
        rep.notes.append("no certifying method applies; explicit check only")
        return rep
    raise Unresolvable(
        f"{q.polynomial()}: no universal or regular ternary sublattice and discriminant {q.disc} "
        "is not fundamental; needs explicit cusp-form decomposition"
    )


# ----------------------------------------------------------------------------
# scaling and critical checks


def anisotropic_square_scaling_check(q, p, n_max):
    """(True, None) if r(p^2 n) = r(n) for 1 <= n <= n_max, else (False, first failing n)."""
    if n_max <= 0:
        return True, None
    th = theta_series(q, p * p * n_max).coefficients
    n = np.arange(1, n_max + 1)
    bad = np.flatnonzero(th[p * p * n] != th[n])
    if len(bad):
        return False, int(n[bad[0]])
    return True, None


def critical_form(q, t):
    """Q + (t+1)(y^2 + z^2 + w^2 + v^2) + (2t+1) u^2."""
    r = q.rank
    diag = [t + 1] * 4 + [2 * t + 1]
    g = [list(row) + [0] * 5 for row in q.gram]
    for i, c in enumerate(diag):
        g.append([0] * (r + i) + [2 * c] + [0] * (4 - i))
    return QuadraticForm(g)


def critical_check(q, t, bound=1000):
    """Build the critical form for truant ``t`` and return its odd exceptions up to ``bound``."""
    big = critical_form(q, t)
    try:
        th = theta_series(big, bound).coefficients
    except ResourceLimitExceeded:
        raise BudgetExceeded("critical form too large to enumerate to this bound")
    exc = [n for n in range(1, bound + 1, 2) if th[n] == 0]
    return big, exc
