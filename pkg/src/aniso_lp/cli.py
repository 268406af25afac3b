"""Command line entry point ``aniso-lp``.

Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on
structural errors (bad arguments, unknown experiment, malformed files).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, bvp, experiments, paraproduct, psdo, trace
from .grid import DomainError, Field, Lattice, StructureError, mode, read_fld, write_fld
from .lp import block_energy_rows
from .sampling import MAX_SEED, generator, smooth_field
from .spaces import SpaceSpec, UnsupportedConfiguration, default_backend, norm

EXIT_OK, EXIT_STRUCTURAL, EXIT_VERDICT = 0, 1, 2
THREADS_ENV = "ANISO_LP_THREADS"


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_STRUCTURAL, f"{self.prog}: error: {message}\n")


def threads() -> int:
    """Parallelism cap from the environment (default 1)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _seed(text: str) -> int:
    try:
        s = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= s <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return s


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _emit(out_dir: str | None, stem: str, summary: dict, rows: list[dict]) -> None:
    text = dumps(summary)
    sys.stdout.write(text)
    if out_dir:
        d = Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{stem}.json").write_text(text)
        (d / f"{stem}.csv").write_text(csv_text(rows))


def _report_summary(name: str, cfg: dict, rep: experiments.Report) -> dict:
    return {"experiment": name, "version": __version__, "params": cfg,
            "verdicts": rep.verdicts, "passed": rep.passed, "measured": rep.measured}


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    cfg_in = {}
    if args.config:
        cfg_in = json.loads(Path(args.config).read_text())
        if not isinstance(cfg_in, dict):
            raise CliError("config file must hold a JSON object")
    name = args.experiment or cfg_in.pop("experiment", None)
    if name not in experiments.REGISTRY:
        raise CliError(f"unknown experiment {name!r}; registered: {', '.join(sorted(experiments.REGISTRY))}")
    cfg_in.pop("experiment", None)
    over = {"seed": args.seed, "sizes": args.sizes, "trials": args.trials, "p": args.p,
            "eps": args.eps, "bc": args.bc, "s1": args.s1, "s2": args.s2}
    cfg_in.update({k: v for k, v in over.items() if v is not None})
    known = set(experiments.REGISTRY[name].defaults) | {"seed"}
    unknown = sorted(set(cfg_in) - known)
    if unknown:
        raise CliError(f"experiment {name!r} does not take {', '.join(unknown)}")
    cfg = experiments.resolve(name, cfg_in)
    cfg["threads"] = threads()
    rep = experiments.run(name, cfg)
    _emit(args.out, name, _report_summary(name, cfg, rep), rep.rows)
    return EXIT_OK if rep.passed else EXIT_VERDICT


def cmd_decompose(args) -> int:
    f = read_fld(args.input)
    rows = block_energy_rows(f, product=args.product)
    summary = {"command": "decompose", "version": __version__,
               "params": {"input": args.input, "product": args.product},
               "blocks": len(rows), "total_energy": float(sum(r["energy"] for r in rows))}
    _emit(args.out, "decompose", summary, rows)
    return EXIT_OK


def cmd_norm(args) -> int:
    f = read_fld(args.input)
    spec = SpaceSpec.parse(args.space)
    rep = norm(f, spec, args.backend or default_backend(spec))
    summary = {"command": "norm", "version": __version__,
               "params": {"input": args.input, "space": args.space}, "report": rep.as_dict()}
    _emit(args.out, "norm", summary, [rep.as_dict() | {"spec": args.space}])
    return EXIT_OK


def cmd_probe(args) -> int:
    seed = args.seed
    if args.kind == "psdo":
        a = psdo.symbol_from_name(args.symbol)
        spec = SpaceSpec.parse(args.space)
        sw = psdo.boundedness_sweep(a, spec, tuple(args.sizes), args.trials, seed)
        rows = [{"symbol": args.symbol, **r} for r in sw["rows"]]
        ok = sw["drift"] <= 2.0
        measured = {"drift": sw["drift"]}
        params = {"symbol": args.symbol, "space": args.space, "sizes": args.sizes,
                  "trials": args.trials, "seed": seed}
    elif args.kind == "paraproduct":
        prm = paraproduct.MultParams(args.s1, args.s2p, args.s2pp, args.s2)
        r = paraproduct.mult_bound_probe(prm, args.trials, seed, tuple(args.sizes))
        rows = r["rows"]
        ok = not r["violations"] and r["drift"] <= 2.0
        measured = {"drift": r["drift"], "violations": r["violations"], "threshold": prm.threshold}
        params = {"s1": args.s1, "s2p": args.s2p, "s2pp": args.s2pp, "s2": args.s2,
                  "sizes": args.sizes, "trials": args.trials, "seed": seed}
    else:
        r = trace.trace_loss_probe(args.direction, args.s1, args.s2, args.p, eps=(0.0, -args.eps)
                                   if args.direction == "mixed" else (-args.eps, 0.0),
                                   seeds=args.trials, seed=seed)
        rows = [{"shell": k, "ratio": v} for k, v in zip(r["shells"], r["ratios"])]
        ok = r["bounded"] if args.eps == 0 else r["slope"] >= 0.15
        measured = {"slope": r["slope"], "target": r["target"]}
        params = {"direction": args.direction, "s1": args.s1, "s2": args.s2, "p": args.p,
                  "eps": args.eps, "trials": args.trials, "seed": seed}
    summary = {"command": f"probe {args.kind}", "version": __version__, "params": params,
               "verdicts": {"expected": ok}, "passed": ok, "measured": measured}
    _emit(args.out, f"probe-{args.kind}", summary, rows)
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_bvp_solve(args) -> int:
    bc = bvp.bc_from_name(args.bc)
    g = read_fld(args.g)
    if g.lattice.n1 != 0:
        raise CliError("boundary data must live on a boundary lattice (n1 = 0)")
    if args.input:
        f = read_fld(args.input)
        sol = bvp.solve_bvp_grid(f, bc, g)
    else:
        sol = bvp.solve_bvp(bvp.HalfCylinderField(g.lattice, ()), bc, g)
    params = {"bc": args.bc, "s1": args.s1, "s2": args.s2, "input": args.input, "g": args.g}
    summary = {"command": "bvp solve", "version": __version__, "params": params,
               "diagnostic": sol.diagnostic}
    if isinstance(sol, bvp.BVPSolution) and sol.u is None:
        summary["solution"] = None
        sys.stdout.write(dumps(summary))
        return EXIT_VERDICT
    modal = sol.u if isinstance(sol, bvp.BVPSolution) else sol.w
    doc = {"version": __version__, "bc": bc.name, "n2": modal.lattice.n2,
           "sizes": list(modal.lattice.sizes), "modes": modal.modes()}
    if isinstance(sol, bvp.GridBVPSolution):
        vpath = Path(args.out).with_suffix(".v.fld")
        write_fld(vpath, sol.v)
        doc["particular"] = vpath.name
    else:
        summary["norm"] = bvp.half_norm(modal, int(args.s1) + 2, args.s2)
    Path(args.out).write_text(dumps(doc))
    summary["residuals"] = sol.residuals
    ok = max(sol.residuals.values()) <= 1e-10
    summary["passed"] = ok
    sys.stdout.write(dumps(summary))
    return EXIT_OK if ok else EXIT_VERDICT


BVP_PROBES = {"calderon": "bvp-identities", "fredholm": "bvp-fredholm", "estimate": "elliptic-estimate"}


def cmd_bvp_probe(args) -> int:
    name = BVP_PROBES[args.experiment]
    over = {"seed": args.seed, "sizes": args.sizes}
    if name != "bvp-identities":
        over["bc"] = args.bc
    cfg = experiments.resolve(name, over)
    cfg["threads"] = threads()
    rep = experiments.run(name, cfg)
    _emit(args.out, name, _report_summary(name, cfg, rep), rep.rows)
    return EXIT_OK if rep.passed else EXIT_VERDICT


def gen_field(kind: str, lat: Lattice, seed: int) -> Field:
    """``random-smooth``, ``mode:k1,k2,...`` or ``bump:i,j``."""
    if kind == "random-smooth":
        return smooth_field(lat, generator(seed, 0))
    head, _, rest = kind.partition(":")
    try:
        nums = [int(x) for x in rest.split(",")] if rest else []
    except ValueError:
        raise CliError(f"malformed field kind {kind!r}") from None
    if head == "mode":
        if len(nums) != lat.ndim:
            raise CliError(f"mode needs {lat.ndim} integers")
        return mode(lat, nums)
    if head == "bump":
        if len(nums) != 2:
            raise CliError("bump needs two shell indices i,j")
        return paraproduct.product_bump(lat, *nums)
    raise CliError(f"malformed field kind {kind!r}")


def cmd_gen_field(args) -> int:
    sizes = args.sizes
    nd = args.n1 + args.n2
    if len(sizes) == 1:
        sizes = sizes * nd
    if len(sizes) != nd:
        raise CliError(f"need {nd} sizes")
    f = gen_field(args.kind, Lattice(args.n1, args.n2, tuple(sizes)), args.seed)
    write_fld(args.out, f)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aniso-lp", description="Anisotropic Littlewood-Paley toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a registered experiment")
    r.add_argument("experiment", nargs="?", help=", ".join(sorted(experiments.REGISTRY)))
    r.add_argument("--config", help="JSON config; command-line flags override it")
    r.add_argument("--seed", type=_seed)
    r.add_argument("--sizes", type=_int_list)
    r.add_argument("--trials", type=int)
    r.add_argument("--p", type=float)
    r.add_argument("--eps", type=float)
    r.add_argument("--bc")
    r.add_argument("--s1", type=float)
    r.add_argument("--s2", type=float)
    r.add_argument("--out", help="directory for <experiment>.csv/.json")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("decompose", help="dyadic block energies of a field")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--product", action="store_true", help="product (i, j) blocks")
    d.add_argument("--out")
    d.set_defaults(func=cmd_decompose)

    n = sub.add_parser("norm", help="norm of a field in a space family:s1:s2:p")
    n.add_argument("--in", dest="input", required=True)
    n.add_argument("--space", required=True)
    n.add_argument("--backend", choices=("lp", "multiplier"))
    n.add_argument("--out")
    n.set_defaults(func=cmd_norm)

    pr = sub.add_parser("probe", help="boundedness and trace probes")
    psub = pr.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("psdo", "paraproduct", "trace"):
        q = psub.add_parser(kind)
        q.add_argument("--seed", type=_seed, required=True)
        q.add_argument("--trials", type=int, default=4 if kind != "trace" else 16)
        q.add_argument("--out")
        q.set_defaults(func=cmd_probe)
        if kind == "psdo":
            q.add_argument("--symbol", required=True)
            q.add_argument("--space", default="Haniso:0:0:2")
            q.add_argument("--sizes", type=_int_list, default=[16, 32, 64])
        elif kind == "paraproduct":
            for name in ("s1", "s2p", "s2pp", "s2"):
                q.add_argument(f"--{name}", type=float, required=True)
            q.add_argument("--sizes", type=_int_list, default=[32, 64])
        else:
            q.add_argument("--direction", choices=trace.CASES, required=True)
            q.add_argument("--s1", type=float, default=1.0)
            q.add_argument("--s2", type=float, default=1.0)
            q.add_argument("--p", type=float, default=2.0)
            q.add_argument("--eps", type=float, default=0.0, help="raise the target by eps")

    b = sub.add_parser("bvp", help="half-cylinder boundary value problems")
    bsub = b.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = bsub.add_parser("solve")
    s.add_argument("--bc", required=True)
    s.add_argument("--s1", type=int, default=0)
    s.add_argument("--s2", type=float, default=0.0)
    s.add_argument("--in", dest="input", help="source on the doubled lattice (omit for f = 0)")
    s.add_argument("--g", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_bvp_solve)
    q = bsub.add_parser("probe")
    q.add_argument("--experiment", choices=sorted(BVP_PROBES), required=True)
    q.add_argument("--bc", default="dirichlet")
    q.add_argument("--seed", type=_seed, required=True)
    q.add_argument("--sizes", type=_int_list)
    q.add_argument("--out")
    q.set_defaults(func=cmd_bvp_probe)

    g = sub.add_parser("gen-field", help="write a deterministic .fld field")
    g.add_argument("kind", help="random-smooth | mode:k1,... | bump:i,j")
    g.add_argument("--n1", type=int, default=1)
    g.add_argument("--n2", type=int, default=1)
    g.add_argument("--sizes", type=_int_list, default=[32])
    g.add_argument("--seed", type=_seed, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_field)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help, returned rather than raised
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (CliError, StructureError, DomainError, UnsupportedConfiguration, KeyError,
            OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"aniso-lp: error: {msg}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
