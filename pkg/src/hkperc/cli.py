"""Command-line interface: ``hkperc {run,scan,pc,certify,exact,families}``.

Exit codes: 0 success, 1 usage error, 2 certification failure, 3 resource guard.
Every output document embeds the resolved configuration so it can be
reproduced from the artifact alone. The worker count is deliberately not
echoed: results do not depend on it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys

import numpy as np

from . import __version__
from .certifier import DEFAULT_CENTERS, MAX_ELL, CertRequest, certify
from .errors import (BudgetExceededError, HKPercError, OrderGuardError, RoundLimitError)
from .families import FamilySpec, make_family, parse_base
from .families.explicit import edge_list_spec
from .oracle import exact_pc, exact_phi
from .process import ProcessSpec, Runner
from .sampler import (TrialRandomness, default_workers, estimate_pc, graph_theory, sample_infected,
                      scan)

EXIT_USAGE = 1
EXIT_CERT_FAIL = 2
EXIT_GUARD = 3

FAMILY_CHOICES = ("hypercube", "product", "hamming", "torus", "grid", "middle-layer", "odd",
                  "folded")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _grid(text: str) -> list[float]:
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like start:stop:step")
    if step <= 0 or b < a:
        raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
    count = int(round((b - a) / step)) + 1
    # rounding keeps 0.30:0.50:0.01 from drifting to 0.30000000000000004
    return [round(a + i * step, 12) for i in range(count) if a + i * step <= b + 1e-12]


def _labels(text: str) -> list[str]:
    """Split a comma-separated label list, keeping "(0,1)" and "{1,2}" labels whole."""
    return re.findall(r"\([^)]*\)|\{[^}]*\}|[^,\s]+", text)


def _add_family(p):
    g = p.add_argument_group("family")
    g.add_argument("--family", choices=FAMILY_CHOICES)
    g.add_argument("--n", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--dims", type=_ints, help="comma-separated side lengths (torus, grid)")
    g.add_argument("--bases", help="comma-separated base graphs, e.g. cycle:4,path:3,edge")
    g.add_argument("--edge-list", help="explicit graph file with one 'u v' pair per line")
    g.add_argument("--K", type=int, help="K for certification (and for explicit graphs)")


def _add_process(p):
    g = p.add_argument_group("process")
    g.add_argument("--process", choices=("majority", "rneighbour", "boot"), default="majority")
    g.add_argument("--m", type=int, default=0)
    g.add_argument("--r", type=int, default=2)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--gamma-scale", type=float, default=1.0)
    g.add_argument("--max-rounds", type=int)
    g.add_argument("--strict", action="store_true", help="use > instead of >= in the threshold")


def _add_output(p):
    p.add_argument("--out", help="write to this file instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_sampling(p, trials):
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default from $HKPERC_WORKERS, else 1)")


def _add_theory(p):
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hkperc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate traces from given or random initial sets")
    _add_family(p)
    _add_process(p)
    _add_sampling(p, 1)
    p.add_argument("--p", type=float)
    p.add_argument("--initial", help="comma-separated vertex labels (empty string = no vertices)")
    _add_output(p)

    p = sub.add_parser("scan", help="Phi(p) on a grid of p from coupled trials")
    _add_family(p)
    _add_process(p)
    _add_sampling(p, 200)
    p.add_argument("--grid", type=_grid, required=True)
    _add_theory(p)
    _add_output(p)

    p = sub.add_parser("pc", help="per-trial critical probabilities and their median")
    _add_family(p)
    _add_process(p)
    _add_sampling(p, 200)
    _add_theory(p)
    _add_output(p)

    p = sub.add_parser("certify", help="check the H(K) properties")
    _add_family(p)
    p.add_argument("--ell-max", type=int, default=3)
    p.add_argument("--centers", type=int, default=DEFAULT_CENTERS,
                   help="sampled centers when |V| > 4096")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    _add_output(p)

    p = sub.add_parser("exact", help="exact Phi and p_c by subset enumeration (|V| <= 20)")
    _add_family(p)
    _add_process(p)
    p.add_argument("--p", type=float, action="append", help="repeatable")
    p.add_argument("--grid", type=_grid)
    p.add_argument("--tol", type=float, default=1e-9)
    _add_output(p)

    p = sub.add_parser("families", help="list family kinds, or describe one family")
    _add_family(p)
    _add_output(p)
    return parser


# -- resolution ---------------------------------------------------------------


def family_spec(args) -> FamilySpec:
    if args.edge_list:
        if args.family:
            raise UsageError("--edge-list and --family are mutually exclusive")
        return edge_list_spec(args.edge_list, K=args.K if args.K is not None else 1)
    if not args.family:
        raise UsageError("one of --family or --edge-list is required")
    kind = args.family.replace("-", "_")
    if kind in ("hypercube", "middle_layer", "odd", "folded"):
        if args.n is None:
            raise UsageError(f"--family {args.family} needs --n")
        return FamilySpec(kind, n=args.n)
    if kind == "hamming":
        if args.n is None or args.q is None:
            raise UsageError("--family hamming needs --n and --q")
        return FamilySpec(kind, n=args.n, q=args.q)
    if kind in ("torus", "grid"):
        if not args.dims:
            raise UsageError(f"--family {args.family} needs --dims")
        return FamilySpec(kind, dims=args.dims)
    if not args.bases:
        raise UsageError("--family product needs --bases")
    bases = tuple(b.strip() for b in args.bases.split(",") if b.strip())
    for b in bases:
        parse_base(b)
    return FamilySpec("product", bases=bases)


def process_spec(args) -> ProcessSpec:
    kw = {"strict": args.strict, "max_rounds": args.max_rounds}
    if args.process == "majority":
        return ProcessSpec.majority(args.m, **kw)
    if args.process == "rneighbour":
        return ProcessSpec.rneighbour(args.r, **kw)
    return ProcessSpec.boot(args.k, args.gamma_scale, **kw)


def _workers(args) -> int:
    w = default_workers() if args.workers is None else args.workers
    if w < 1:
        raise UsageError("--workers must be >= 1")
    return w


def _py(obj):
    """Recursively convert numpy scalars so json output is stable."""
    if isinstance(obj, dict):
        return {str(k): _py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_py(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _emit(args, doc: dict, rows: list[dict]):
    if args.format == "json":
        text = json.dumps(_py(doc), indent=2) + "\n"
    else:
        buf = io.StringIO()
        rows = _py(rows)
        fields = list(rows[0]) if rows else []
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _base_config(args, fspec, pspec=None) -> dict:
    cfg = {"command": args.command, "family": fspec.to_dict()}
    if pspec is not None:
        cfg["process"] = pspec.to_dict()
    return cfg


def _theory_cols(theory) -> dict:
    keys = ("pc_tilde", "lower", "upper", "bbm")
    if theory is None:
        return {k: None for k in keys}
    t = theory.to_dict()
    return {k: t[k] for k in keys}


# -- commands -----------------------------------------------------------------


def cmd_run(args) -> int:
    fspec, pspec = family_spec(args), process_spec(args)
    graph = make_family(fspec)
    runner = Runner(graph, pspec)
    cfg = _base_config(args, fspec, pspec)
    if args.initial is not None:
        if args.p is not None:
            raise UsageError("--initial and --p are mutually exclusive")
        labels = _labels(args.initial)
        seeds = [[graph.parse(t) for t in labels]]
        cfg["initial"] = [graph.label(v) for v in seeds[0]]
    else:
        if args.p is None:
            raise UsageError("run needs --p or --initial")
        if args.trials < 1:
            raise UsageError("--trials must be >= 1")
        cfg.update({"p": args.p, "trials": args.trials, "seed": args.seed})
        seeds = [sample_infected(graph, args.p, TrialRandomness(args.seed, t, graph.order))
                 for t in range(args.trials)]
    records = []
    for t, A0 in enumerate(seeds):
        tr = runner.run(A0)
        records.append({"trial": t, "initial_size": len(A0), "percolated": tr.percolated,
                        "rounds": tr.rounds_to_stabilize, "final_size": tr.final_size})
    doc = {"config": cfg, "graph": graph.describe(), "records": records}
    _emit(args, doc, records)
    return 0


def cmd_scan(args) -> int:
    fspec, pspec = family_spec(args), process_spec(args)
    graph = make_family(fspec)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rep = scan(graph, pspec, args.grid, args.trials, args.seed, _workers(args),
               args.epsilon, args.lam)
    cfg = _base_config(args, fspec, pspec)
    cfg.update({"grid": args.grid, "trials": args.trials, "seed": args.seed,
                "epsilon": args.epsilon, "lambda": args.lam})
    theory = _theory_cols(rep.theory)
    rows = [{**r.to_dict(), **theory} for r in rep.rows]
    doc = {"config": cfg, "graph": graph.describe(), "rows": rows, "pc": rep.pc.to_dict(),
           "theory": rep.theory.to_dict() if rep.theory else None}
    _emit(args, doc, rows)
    return 0


def cmd_pc(args) -> int:
    fspec, pspec = family_spec(args), process_spec(args)
    graph = make_family(fspec)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    est = estimate_pc(graph, pspec, args.trials, args.seed, _workers(args))
    theory = graph_theory(graph, args.epsilon, args.lam)
    cfg = _base_config(args, fspec, pspec)
    cfg.update({"trials": args.trials, "seed": args.seed, "epsilon": args.epsilon,
                "lambda": args.lam})
    row = {"trials": est.trials, "median": est.median,
           **{f"q{int(q * 100):02d}": v for q, v in est.quantiles.items()},
           **_theory_cols(theory)}
    doc = {"config": cfg, "graph": graph.describe(), "pc": est.to_dict(),
           "theory": theory.to_dict() if theory else None}
    _emit(args, doc, [row])
    return 0


def cmd_certify(args) -> int:
    fspec = family_spec(args)
    graph = make_family(fspec)
    K = args.K if args.K is not None else graph.canonical_K
    if not 0 <= args.ell_max <= MAX_ELL:
        raise UsageError(f"--ell-max must lie in 0..{MAX_ELL}")
    req = CertRequest(graph, K, args.ell_max, args.centers, args.seed, args.depth,
                      workers=_workers(args))
    cert = certify(req)
    cfg = _base_config(args, fspec)
    cfg.update({"K": K, "ell_max": args.ell_max, "centers": args.centers, "seed": args.seed,
                "depth": args.depth})
    doc = {"config": cfg, "certificate": cert.to_dict()}
    rows = []
    for v in cert.to_dict()["properties"]:
        w = v.get("witness") or {}
        rows.append({"property": v["property"], "verdict": v["verdict"],
                     "checked": v["checked"], "skipped": v["skipped"],
                     "x": w.get("x"), "ell": w.get("ell"), "y": w.get("y"),
                     "measured": w.get("measured"), "bound": w.get("bound"),
                     "reason": v.get("reason")})
    _emit(args, doc, rows)
    return 0 if cert.passed else EXIT_CERT_FAIL


def cmd_exact(args) -> int:
    fspec, pspec = family_spec(args), process_spec(args)
    graph = make_family(fspec)
    ps = list(args.p or []) + list(args.grid or [])
    for p in ps:
        if not 0 <= p <= 1:
            raise UsageError("p values must lie in [0, 1]")
    rows = [{"p": p, "phi": exact_phi(graph, pspec, p)} for p in ps]
    pc = exact_pc(graph, pspec, args.tol)
    cfg = _base_config(args, fspec, pspec)
    cfg.update({"p": ps, "tol": args.tol})
    doc = {"config": cfg, "graph": graph.describe(), "rows": rows, "exact_pc": pc}
    _emit(args, doc, rows or [{"p": None, "phi": None}])
    return 0


def cmd_families(args) -> int:
    if args.family or args.edge_list:
        fspec = family_spec(args)
        graph = make_family(fspec)
        desc = graph.describe()
        doc = {"config": _base_config(args, fspec), "graph": desc}
        row = {"kind": fspec.kind, "order": desc["order"], "canonical_K": desc["canonical_K"],
               "min_degree": desc["min_degree"], "max_degree": desc["max_degree"]}
        _emit(args, doc, [row])
        return 0
    kinds = [{"family": f, "parameters": p} for f, p in (
        ("hypercube", "--n"), ("product", "--bases cycle:k,path:k,complete:k,star:k,edge"),
        ("hamming", "--n --q"), ("torus", "--dims"), ("grid", "--dims"),
        ("middle-layer", "--n"), ("odd", "--n"), ("folded", "--n (>= 3)"),
        ("explicit", "--edge-list FILE [--K]"))]
    _emit(args, {"config": {"command": "families"}, "families": kinds}, kinds)
    return 0


COMMANDS = {"run": cmd_run, "scan": cmd_scan, "pc": cmd_pc, "certify": cmd_certify,
            "exact": cmd_exact, "families": cmd_families}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (BudgetExceededError, OrderGuardError, RoundLimitError, MemoryError) as exc:
        print(f"hkperc: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, ValueError, HKPercError, OSError) as exc:
        print(f"hkperc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
