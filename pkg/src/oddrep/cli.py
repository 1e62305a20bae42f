"""Command line entry point: ``oddrep <command> ...``.

Primary results go to stdout and to ``<out>/<command>.jsonl`` as one JSON
object per line; timing and host details go to a ``.meta.json`` sidecar so
reruns produce identical primary output.  Figures are written next to the
JSONL file when ``--out`` is given.
"""

import argparse
from dataclasses import asdict, dataclass, field, fields
import json
import os
import platform
import sys
import time

from . import __version__
from .errors import FormError, Unresolvable

SCHEMA_VERSION = 1
BUDGET_ENV = "ODDREP_BUDGET_SECONDS"
EXIT_FAIL = 1
EXIT_UNRESOLVABLE = 2


@dataclass
class JobConfig:
    command: str = ""
    form: str = None
    form_file: str = None
    budget_seconds: float = None
    max_vectors: int = None
    candidate_limit: int = None
    truncation: float = 15.0
    out: str = None
    checkpoint: str = None
    regular_db: str = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("budget_seconds", "max_vectors", "candidate_limit"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.truncation <= 0 or self.jobs < 1:
            raise ValueError("truncation and jobs must be positive")

    def to_file(self, path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=1, sort_keys=True)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})


class Output:
    """Writes JSONL records to stdout and optionally to ``<out>/<command>.jsonl``."""

    def __init__(self, command, out_dir):
        self.command = command
        self.out_dir = out_dir
        self.start = time.time()
        self.fh = None
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            self.fh = open(self.path(f"{command}.jsonl"), "w")

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def emit(self, record):
        record = {"schema": SCHEMA_VERSION, "command": self.command, **record}
        line = json.dumps(record, sort_keys=True, default=str)
        print(line)
        if self.fh:
            self.fh.write(line + "\n")

    def close(self, status):
        if self.fh:
            self.fh.close()
            meta = {"started": self.start, "seconds": time.time() - self.start, "exit": status,
                    "host": platform.node(), "python": platform.python_version(), "version": __version__}
            with open(self.path(f"{self.command}.meta.json"), "w") as fh:
                json.dump(meta, fh, indent=1)


def _load_form(cfg):
    from .forms import parse_form

    if cfg.form_file:
        with open(cfg.form_file) as fh:
            return parse_form(fh.read().strip())
    return parse_form(cfg.form)


def cmd_theta(cfg, out):
    from .forms import theta_series

    q = _load_form(cfg)
    bound = cfg.extra["bound"]
    kw = {"max_vectors": cfg.max_vectors} if cfg.max_vectors else {}
    th = theta_series(q, bound, **kw).coefficients
    if not cfg.extra.get("quiet"):
        out.emit({"form": q.polynomial(), "bound": bound, "coefficients": [int(v) for v in th]})
    else:
        print(" ".join(str(int(v)) for v in th))
    if out.fh:
        from .plots import plot_theta

        plot_theta(th, out.path("theta.png"), q.polynomial())
    return 0


def cmd_escalate(cfg, out):
    from .escalation import ODD, TargetSet, build_tree

    target = ODD if cfg.extra["target"] == "odd" else TargetSet.positive()
    deadline = time.time() + cfg.budget_seconds if cfg.budget_seconds else None
    tree = build_tree(target, cfg.extra["max_dim"], cfg.extra["bound"], checkpoint=cfg.checkpoint,
                      jobs=cfg.jobs, deadline=deadline, clock=time.time)
    for node in tree.nodes():
        out.emit({"node": node.to_json()})
    rows = tree.summary_rows()
    for row in rows:
        out.emit({"layer": row})
    out.emit({"summary": ",".join(str(c) for c in tree.counts())})
    if out.fh:
        from .plots import plot_layer_counts

        tree.write_summary_csv(out.path("escalate_summary.csv"))
        plot_layer_counts(rows, out.path("escalate_layers.png"))
    return 0


def cmd_certify(cfg, out):
    from .verify import RegularTernaryDB, ReportConfig, report

    q = _load_form(cfg)
    db = RegularTernaryDB.load(cfg.regular_db)
    limit = None if cfg.extra.get("full") else cfg.candidate_limit
    rc = ReportConfig(db, limit, cfg.extra.get("interval_bound"), cfg.budget_seconds)
    try:
        rep = report(q, rc)
    except Unresolvable as exc:
        out.emit({"form": q.polynomial(), "status": "unresolvable", **exc.to_dict()})
        return EXIT_UNRESOLVABLE
    out.emit({"report": rep.to_dict()})
    if out.fh:
        from .plots import plot_exceptions

        plot_exceptions(rep, out.path("certify_exceptions.png"))
        cert = rep.stats.get("certificate")
        if cert:
            from .analytic import certificate_ratios
            from .plots import plot_certificate

            n, r = certificate_ratios(q, cfg.extra.get("audit_bound", 5000))
            plot_certificate(n, r, cert["C_Q"], out.path("certify_audit.png"), q.polynomial())
    return 0


def cmd_appendix_check(cfg, out):
    from .escalation import check_appendix

    ok = True
    for row, got in check_appendix(path=cfg.extra.get("csv")):
        passed = got == row.truant
        ok &= passed
        out.emit({"form": row.text, "stated": row.truant, "computed": got, "pass": passed})
    return 0 if ok else EXIT_FAIL


def cmd_critical_check(cfg, out):
    from .escalation import truant
    from .verify import critical_check

    q = _load_form(cfg)
    t = cfg.extra.get("truant") or truant(q)
    big, exc = critical_check(q, t, cfg.extra["bound"])
    passed = exc == [t]
    out.emit({"form": q.polynomial(), "truant": t, "critical_form": big.polynomial(), "bound": cfg.extra["bound"],
              "exceptions": exc, "pass": passed})
    return 0 if passed else EXIT_FAIL


def cmd_local(cfg, out):
    from .arith import prime_divisors
    from .local import epsilon_invariant, is_anisotropic, jordan_splitting, local_density, locally_missed_classes

    q = _load_form(cfg)
    primes = sorted(set(prime_divisors(2 * q.disc)) | set(cfg.extra.get("primes") or []))
    for p in primes:
        rec = {"form": q.polynomial(), "prime": p, "epsilon": epsilon_invariant(q, p),
               "anisotropic": is_anisotropic(q, p),
               "jordan": [asdict(b) for b in jordan_splitting(q, p).blocks]}
        if cfg.extra.get("n"):
            dv = local_density(q, cfg.extra["n"], p)
            rec["n"] = cfg.extra["n"]
            rec["density"] = str(dv.value)
        out.emit(rec)
    out.emit({"form": q.polynomial(), "missed_odd_classes": locally_missed_classes(q).describe()})
    return 0


def cmd_sweep(cfg, out):
    from .forms import parse_form
    from .verify import check_interval, check_reformulated

    if cfg.extra.get("ternaries"):
        jobs = [("x^2+2y^2+5z^2+xz", 630654, False),
                ("x^2+3y^2+6z^2+xy+2yz", 1680000, True),
                ("x^2+3y^2+7z^2+xy+xz", 10912000, True)]
    else:
        jobs = [(cfg.form, cfg.extra["hi"], cfg.extra.get("reformulate", False))]
    ok = True
    for text, hi, reform in jobs:
        q = parse_form(text)
        if reform:
            rep = check_reformulated(q, hi, budget_seconds=cfg.budget_seconds)
        else:
            rep = check_interval(q, cfg.extra.get("lo", 1), hi, budget_seconds=cfg.budget_seconds)
        ok &= not rep.exceptions
        out.emit({"report": rep.to_dict()})
    return 0 if ok else EXIT_FAIL


COMMANDS = {
    "theta": cmd_theta,
    "escalate": cmd_escalate,
    "certify": cmd_certify,
    "appendix-check": cmd_appendix_check,
    "critical-check": cmd_critical_check,
    "local": cmd_local,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="oddrep", description="Odd-integer representation by quadratic forms.")
    parser.add_argument("--config", help="JSON job config; command line flags override it")
    parser.add_argument("--out", help="directory for JSONL output and figures")
    parser.add_argument("--budget-seconds", type=float, default=None,
                        help=f"wall-clock budget (default from ${BUDGET_ENV})")
    parser.add_argument("--checkpoint", help="JSONL checkpoint path for resumable runs")
    parser.add_argument("--regular-db", help="file of regular ternary forms, one per line")
    parser.add_argument("--jobs", type=int, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theta", help="theta series coefficients")
    p.add_argument("form")
    p.add_argument("bound", type=int)
    p.add_argument("--plain", action="store_true", help="print coefficients separated by spaces")
    p.add_argument("--max-vectors", type=int)

    p = sub.add_parser("escalate", help="escalator tree")
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--target", choices=["odd", "positive"], default="odd")
    p.add_argument("--bound", type=int, default=10_000)

    p = sub.add_parser("certify", help="exception report by methods 1-3")
    p.add_argument("form")
    p.add_argument("--candidate-limit", type=int, default=10**7)
    p.add_argument("--full", action="store_true", help="sweep every F4 candidate (long batch run)")
    p.add_argument("--interval-bound", type=int, help="fallback explicit check when no method applies")

    p = sub.add_parser("appendix-check", help="recompute the truant table")
    p.add_argument("--csv", help="alternative table (form,truant)")

    p = sub.add_parser("critical-check", help="critical-integer construction")
    p.add_argument("form", help='base form, "0" for the zero form')
    p.add_argument("--truant", type=int)
    p.add_argument("--bound", type=int, default=1000)

    p = sub.add_parser("local", help="local invariants and densities")
    p.add_argument("form")
    p.add_argument("--n", type=int)
    p.add_argument("--primes", type=int, nargs="*")

    p = sub.add_parser("sweep", help="interval exception check")
    p.add_argument("form", nargs="?")
    p.add_argument("--lo", type=int, default=1)
    p.add_argument("--hi", type=int, default=10_000)
    p.add_argument("--reformulate", action="store_true", help="check 4n = 4 mod 8 via 4Q = (2x+L)^2 + S")
    p.add_argument("--ternaries", action="store_true", help="run the three ternary interval checks")
    return parser


def config_from_args(args):
    cfg = JobConfig.from_file(args.config) if args.config else JobConfig()
    cfg.command = args.command
    for name in ("out", "checkpoint", "regular_db"):
        if getattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if args.jobs:
        cfg.jobs = args.jobs
    budget = args.budget_seconds
    if budget is None and os.environ.get(BUDGET_ENV):
        budget = float(os.environ[BUDGET_ENV])
    if budget is not None:
        cfg.budget_seconds = budget
    if getattr(args, "form", None):
        cfg.form = args.form
    extra = dict(cfg.extra)
    if args.command == "theta":
        extra.update(bound=args.bound, quiet=args.plain)
        cfg.max_vectors = args.max_vectors or cfg.max_vectors
    elif args.command == "escalate":
        extra.update(max_dim=args.max_dim, target=args.target, bound=args.bound)
    elif args.command == "certify":
        cfg.candidate_limit = args.candidate_limit
        extra.update(full=args.full, interval_bound=args.interval_bound)
    elif args.command == "appendix-check":
        extra.update(csv=args.csv)
    elif args.command == "critical-check":
        extra.update(truant=args.truant, bound=args.bound)
    elif args.command == "local":
        extra.update(n=args.n, primes=args.primes)
    elif args.command == "sweep":
        extra.update(lo=args.lo, hi=args.hi, reformulate=args.reformulate, ternaries=args.ternaries)
    cfg.extra = extra
    cfg.__post_init__()
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    out = Output(cfg.command, cfg.out)
    status = EXIT_FAIL
    try:
        status = COMMANDS[cfg.command](cfg, out)
    except FormError as exc:
        out.emit(exc.to_dict())
        status = EXIT_FAIL
    finally:
        out.close(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
