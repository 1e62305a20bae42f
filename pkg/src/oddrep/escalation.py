"""Escalator trees: truants, escalations and the classes they produce."""

import csv
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import BudgetExceeded
from .forms import QuadraticForm, fraction_inverse, parse_form, theta_series
from .lattice import is_isometric, reduce
from .local import locally_missed_classes, smallest_locally_missed_odd

DEFAULT_NODE_BOUND = 10_000
KAPLANSKY_BOUND = 2**14

# Kaplansky's three open ternaries
CONJECTURE_FORMS = (
    "x^2 + 2y^2 + 5z^2 + xz",
    "x^2 + 3y^2 + 6z^2 + xy + 2yz",
    "x^2 + 3y^2 + 7z^2 + xy + xz",
)

CRITICAL_INTEGERS = (
    1, 3, 5, 7, 11, 13, 15, 17, 19, 21, 23, 29, 31, 33, 35, 37, 39, 41, 47,
    51, 53, 57, 59, 77, 83, 85, 87, 89, 91, 93, 105, 119, 123, 133, 137,
    143, 145, 187, 195, 203, 205, 209, 231, 319, 385, 451,
)


@dataclass(frozen=True)
class TargetSet:
    """A set of positive integers given by a predicate and its ascending enumeration."""

    name: str
    modulus: int = 2
    residues: tuple = (1,)

    def __contains__(self, n):
        return n > 0 and n % self.modulus in self.residues

    def iterate(self, start=1, stop=None):
        n = max(int(start), 1)
        while stop is None or n <= stop:
            if n in self:
                yield n
            n += 1

    def mask(self, bound):
        n = np.arange(bound + 1)
        m = np.isin(n % self.modulus, self.residues)
        m[0] = False
        return m

    @classmethod
    def odd(cls):
        return cls("odd")

    @classmethod
    def positive(cls):
        return cls("positive", 1, (0,))


ODD = TargetSet.odd()


def truant(q, target=ODD, bound=DEFAULT_NODE_BOUND):
    """Least element of ``target`` not represented by ``q``, or ``None`` if none up to ``bound``."""
    th = theta_series(q, bound).coefficients
    missing = np.flatnonzero(target.mask(bound) & (th == 0))
    return int(missing[0]) if len(missing) else None


def exceptions(q, target=ODD, bound=DEFAULT_NODE_BOUND):
    """All elements of ``target`` up to ``bound`` that ``q`` does not represent."""
    th = theta_series(q, bound).coefficients
    return [int(n) for n in np.flatnonzero(target.mask(bound) & (th == 0))]


def _cross_vectors(q, t):
    """Integer vectors b with |b_i| <= sqrt(2 A_ii t) (Cauchy-Schwarz box)."""
    ranges = [range(-math.isqrt(2 * q.gram[i][i] * t), math.isqrt(2 * q.gram[i][i] * t) + 1) for i in range(q.rank)]
    return itertools.product(*ranges)


def _schur_positive(inv, b, t):
    """2t - b^T A^{-1} b > 0, i.e. the bordered Gram matrix stays positive definite."""
    r = len(b)
    s = sum(inv[i][j] * b[i] * b[j] for i in range(r) for j in range(r))
    return 2 * t - s > 0


def _dedup_key(q, depth):
    th = theta_series(q, depth).coefficients
    return (q.disc, tuple(int(v) for v in th))


def dedup_forms(forms, depth=None):
    """Isometry-class representatives (reduced) of ``forms``, in first-seen order."""
    buckets = {}
    out = []
    for f in forms:
        d = depth if depth is not None else max(f.gram[i][i] for i in range(f.rank)) // 2 + 8
        key = _dedup_key(f, d)
        reps = buckets.setdefault(key, [])
        if any(is_isometric(g, f) for g in reps):
            continue
        reps.append(f)
        out.append(f)
    return [reduce(f) for f in out]


def raw_escalations(q, t):
    """Bordered Gram matrices [[A, b], [b^T, 2t]] that are positive definite (not deduped)."""
    q = reduce(q)
    r = q.rank
    if r == 0:
        return [QuadraticForm([[2 * t]])]
    inv = fraction_inverse(q.gram)
    out = []
    for b in _cross_vectors(q, t):
        if not _schur_positive(inv, b, t):
            continue
        g = [list(row) + [b[i]] for i, row in enumerate(q.gram)] + [list(b) + [2 * t]]
        out.append(QuadraticForm(g))
    return out


def escalations(q, t):
    """Isometry classes of lattices generated by ``q`` and one new vector of norm ``t``."""
    return dedup_forms(raw_escalations(q, t), depth=_layer_depth(q.rank + 1, t))


def _layer_depth(dim, t):
    return max(2 * t, 24)


@dataclass
class EscalatorNode:
    id: int
    dim: int
    form: QuadraticForm
    parent: int | None
    status: str  # "truant", "universal" (up to bound) or "deficient"
    truant: int | None = None
    bound: int = DEFAULT_NODE_BOUND
    missed: int | None = None  # smallest locally missed element for deficient nodes
    profile: dict | None = None

    def to_json(self):
        return {
            "id": self.id,
            "dim": self.dim,
            "gram": [list(r) for r in self.form.gram],
            "parent": self.parent,
            "status": self.status,
            "truant": self.truant,
            "bound": self.bound,
            "missed": self.missed,
            "profile": self.profile,
        }

    @classmethod
    def from_json(cls, d):
        return cls(d["id"], d["dim"], QuadraticForm(d["gram"]), d["parent"], d["status"], d["truant"],
                   d["bound"], d.get("missed"), d.get("profile"))


@dataclass
class EscalationTree:
    target: TargetSet
    layers: dict = field(default_factory=dict)  # dim -> list of EscalatorNode

    def nodes(self):
        return [n for d in sorted(self.layers) for n in self.layers[d]]

    def counts(self):
        return [len(self.layers[d]) for d in sorted(self.layers)]

    def node(self, node_id):
        return next(n for n in self.nodes() if n.id == node_id)

    def summary_rows(self):
        rows = []
        for d in sorted(self.layers):
            layer = self.layers[d]
            rows.append({
                "dim": d,
                "classes": len(layer),
                "universal": sum(n.status == "universal" for n in layer),
                "deficient": sum(n.status == "deficient" for n in layer),
                "truants": " ".join(str(t) for t in sorted({n.truant for n in layer if n.truant})),
            })
        return rows

    def write_summary_csv(self, path):
        rows = self.summary_rows()
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


def classify_node(q, target=ODD, bound=DEFAULT_NODE_BOUND):
    """Status of a form: locally deficient first, otherwise its truant up to ``bound``."""
    missed = None
    profile = None
    if q.rank >= 3 and target.name == "odd":
        prof = locally_missed_classes(q)
        if not prof.is_empty():
            missed = smallest_locally_missed_odd(q)
            profile = prof.describe()
    t = truant(q, target, bound)
    if missed is not None and q.rank >= 4:
        return "deficient", t, missed, profile
    if t is None:
        return "universal", None, missed, profile
    return "truant", t, missed, profile


def _classify_job(args):
    gram, name, modulus, residues, bound = args
    return classify_node(QuadraticForm(gram), TargetSet(name, modulus, residues), bound)


def _escalate_job(args):
    gram, t = args
    return [f.gram for f in raw_escalations(QuadraticForm(gram), t)]


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))
    return [fn(x) for x in items]


def _load_checkpoint(path):
    layers = {}
    done = set()
    with open(path) as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("layer_done") is not None:
                done.add(rec["layer_done"])
                continue
            node = EscalatorNode.from_json(rec)
            layers.setdefault(node.dim, []).append(node)
    return {d: v for d, v in layers.items() if d in done}


def build_tree(target=ODD, max_dim=3, bound=DEFAULT_NODE_BOUND, checkpoint=None, jobs=1,
               bounds=None, deadline=None, clock=None):
    """Escalate the zero lattice layer by layer up to ``max_dim``.

    ``bounds`` optionally maps a dimension to its own truant search bound.
    Locally deficient nodes of dimension at least four are not escalated
    themselves; instead their parent is escalated by the smallest locally
    missed target (auxiliary escalators), and the deficient node is dropped
    from the next layer's parents.  With ``checkpoint`` every finished layer
    is appended to a JSONL file and a rerun resumes after the last one.
    """
    if max_dim > 5:
        raise ValueError("escalation trees are supported up to dimension 5")
    bounds = bounds or {}
    tree = EscalationTree(target)
    if checkpoint and os.path.exists(checkpoint):
        tree.layers = _load_checkpoint(checkpoint)
        # drop any half-written layer
        with open(checkpoint, "w") as fh:
            for d in sorted(tree.layers):
                for n in tree.layers[d]:
                    fh.write(json.dumps(n.to_json()) + "\n")
                fh.write(json.dumps({"layer_done": d}) + "\n")
    next_id = 1 + max((n.id for n in tree.nodes()), default=-1)

    def add_layer(dim, forms, parents):
        nonlocal next_id
        b = bounds.get(dim, bound)
        stats = _map(_classify_job, [(f.gram, target.name, target.modulus, target.residues, b) for f in forms], jobs)
        layer = []
        for f, par, (status, t, missed, profile) in zip(forms, parents, stats):
            layer.append(EscalatorNode(next_id, dim, f, par, status, t, b, missed, profile))
            next_id += 1
        tree.layers[dim] = layer
        if checkpoint:
            with open(checkpoint, "a") as fh:
                for n in layer:
                    fh.write(json.dumps(n.to_json()) + "\n")
                fh.write(json.dumps({"layer_done": dim}) + "\n")

    if 0 not in tree.layers:
        add_layer(0, [QuadraticForm.empty()], [None])
    for dim in range(1, max_dim + 1):
        if dim in tree.layers:
            continue
        if deadline is not None and clock is not None and clock() > deadline:
            raise BudgetExceeded(f"budget exhausted before layer {dim}; tree persisted to checkpoint")
        prev = tree.layers[dim - 1]
        jobs_in = [(n.form.gram, n.truant) for n in prev if n.status == "truant"]
        owners = [n.id for n in prev if n.status == "truant"]
        # auxiliary escalations: parent of a deficient node, by its locally missed target
        for n in prev:
            if n.status == "deficient" and n.parent is not None:
                par = tree.node(n.parent)
                jobs_in.append((par.form.gram, n.missed))
                owners.append(par.id)
        raw = _map(_escalate_job, jobs_in, jobs)
        forms, parents = [], []
        seen = {}
        for (gram, t), owner, children in zip(jobs_in, owners, raw):
            depth = _layer_depth(dim, t)
            for g in children:
                f = QuadraticForm(g)
                key = _dedup_key(f, depth)
                reps = seen.setdefault(key, [])
                if any(is_isometric(h, f) for h in reps):
                    continue
                reps.append(f)
                forms.append(f)
                parents.append(owner)
        # a prefix key computed at different depths may miss cross-parent duplicates
        forms, parents = _final_dedup(forms, parents)
        add_layer(dim, [reduce(f) for f in forms], parents)
    return tree


def _final_dedup(forms, parents):
    depth = 32
    buckets = {}
    keep_f, keep_p = [], []
    for f, p in zip(forms, parents):
        key = _dedup_key(f, depth)
        reps = buckets.setdefault(key, [])
        if any(is_isometric(g, f) for g in reps):
            continue
        reps.append(f)
        keep_f.append(f)
        keep_p.append(p)
    return keep_f, keep_p


def critical_integers(tree):
    """Sorted set of truants occurring in the tree."""
    return sorted({n.truant for n in tree.nodes() if n.truant is not None})


def kaplansky_candidates(tree, check_bound=KAPLANSKY_BOUND):
    """Ternary escalators with no exception in the target set up to ``check_bound``."""
    out = []
    for n in tree.layers.get(3, []):
        if truant(n.form, tree.target, check_bound) is None:
            out.append(n.form)
    return out


def contains_form_class(forms, q):
    return any(is_isometric(f, q) for f in forms)


@dataclass(frozen=True)
class AppendixRow:
    form: QuadraticForm
    text: str
    truant: int


def appendix_table(path=None):
    """The 46 forms whose truants are the critical integers (bundled CSV unless ``path``)."""
    rows = []
    if path is None:
        data = resources.files("oddrep").joinpath("data/appendix_a.csv").read_text()
    else:
        with open(path) as fh:
            data = fh.read()
    for rec in csv.DictReader(data.splitlines()):
        text = rec["form"]
        rows.append(AppendixRow(parse_form(text), text, int(rec["truant"])))
    return rows


def check_appendix(bound=None, path=None):
    """Recompute each row's truant; returns (row, computed truant) pairs."""
    out = []
    for row in appendix_table(path):
        b = bound or max(4 * row.truant, 64)
        out.append((row, truant(row.form, ODD, b)))
    return out
