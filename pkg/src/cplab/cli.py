"""Command-line front end.

Exit codes: 0 success, 2 configuration or usage error, 3 output not writable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

from . import __version__, kernels
from .lemma import check_counterexample, run_boundedness_experiment, run_rate_experiment
from .model import ConfigurationError, ShapeError, assumption_diagnostics
from .reports import (
    RunManifest,
    ensure_parent,
    format_real,
    load_config,
    manifest_path,
    read_dataset,
    render_dataset,
    render_summary,
    write_text,
)
from .segmentation import fit_known_k
from .simulation import simulate

COMMANDS = ("counterexample", "simulate", "fit", "lemma-rate", "lemma-bound", "diagnose")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cplab", description="Penalized change-point regression and lemma experiments.")
    parser.add_argument("--version", action="version", version=f"cplab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", metavar="PATH", help="INI config file or a run manifest")
        p.add_argument("--seed", type=int, help="master seed (overrides experiment.master_seed)")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="output format (overrides output.format)")
        p.add_argument("--replications", type=int, help="overrides experiment.replications")
        p.add_argument("--n-grid", metavar="LIST", help="comma-separated rate grid (overrides experiment.n_grid)")
    return parser


def _fmt_num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else format_real(v)


def _counterexample(cfg, fmt):
    lhs, rhs = check_counterexample(2.0, 1.0)
    line = f"lhs={_fmt_num(lhs)} rhs={_fmt_num(rhs)} violated={'true' if lhs > rhs else 'false'}"
    if fmt == "json":
        text = json.dumps({"a": 2, "b": 1, "lhs": lhs, "rhs": rhs, "violated": lhs > rhs}) + "\n"
    else:
        text = f"a,b,lhs,rhs,violated\n2,1,{_fmt_num(lhs)},{_fmt_num(rhs)},{'true' if lhs > rhs else 'false'}\n"
    return text, line, {}


def _simulate(cfg, fmt):
    model = cfg.true_model()
    data = simulate(model, cfg.design(model.p), cfg.noise(), cfg.get("experiment", "master_seed"))
    return render_dataset(data, fmt), None, {}


def _dataset(cfg):
    path = cfg.get("data", "path")
    if not path:
        raise ConfigurationError("data.path is required")
    return read_dataset(path)


def _fit(cfg, fmt):
    data = _dataset(cfg)
    seg = fit_known_k(data, cfg.segmentation())
    edges = (0, *seg.changepoints, data.n)
    records = []
    for r, fit in enumerate(seg.fits):
        rec = {"segment": r + 1, "start": edges[r] + 1, "end": edges[r + 1]}
        rec.update({f"phi{j + 1}": float(v) for j, v in enumerate(fit.phi_hat)})
        rec.update(rss=fit.rss, penalty=fit.penalty_value, objective=fit.objective,
                   converged=fit.converged, iterations=fit.iterations)
        records.append(rec)
    if fmt == "json":
        text = json.dumps({"changepoints": list(seg.changepoints), "total_s": seg.total_s,
                           "segments": records}, indent=2) + "\n"
    else:
        text = _csv(records)
    notes = {"nonconverged_segments": sum(1 for f in seg.fits if not f.converged)}
    return text, None, notes


def _diagnose(cfg, fmt):
    data = _dataset(cfg)
    diag = assumption_diagnostics(data, cfg.get("segmentation", "changepoints"))
    records = [{"segment": r + 1, "start": s.start, "end": s.end, "eig_min": s.eig_min,
                "eig_max": s.eig_max, "max_norm_term": diag.max_norm_term}
               for r, s in enumerate(diag.segments)]
    if fmt == "json":
        for rec, s in zip(records, diag.segments):
            rec["gram"] = s.gram.tolist()
        text = json.dumps({"max_norm_term": diag.max_norm_term, "segments": records}, indent=2) + "\n"
    else:
        text = _csv(records)
    return text, None, {}


def _lemma(run):
    def command(cfg, fmt):
        summary = run(cfg.lemma_config())
        notes = {"nonconverged": {str(r.n): r.nonconverged for r in summary.rows}}
        for row in summary.rows:
            if row.nonconverged:
                print(f"warning: {row.nonconverged} of {row.replications} fits at n={row.n} "
                      "hit the iteration budget", file=sys.stderr)
        return render_summary(summary, fmt), None, notes
    return command


def _csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(records[0]))
    for rec in records:
        writer.writerow([
            ("true" if v else "false") if isinstance(v, bool)
            else v if isinstance(v, int) else format_real(v)
            for v in rec.values()
        ])
    return buf.getvalue()


HANDLERS = {
    "counterexample": _counterexample,
    "simulate": _simulate,
    "fit": _fit,
    "lemma-rate": _lemma(run_rate_experiment),
    "lemma-bound": _lemma(run_boundedness_experiment),
    "diagnose": _diagnose,
}


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    started = _now()
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.set("experiment", "master_seed", args.seed)
        if args.replications is not None:
            cfg.set("experiment", "replications", args.replications)
        if args.n_grid is not None:
            cfg.set("experiment", "n_grid", args.n_grid)
        if args.format is not None:
            cfg.set("output", "format", args.format)
        fmt = cfg.get("output", "format")
        text, line, notes = HANDLERS[args.command](cfg, fmt)
    except (ConfigurationError, ShapeError) as exc:
        print(f"cplab {args.command}: configuration error: {exc}", file=sys.stderr)
        return 2

    if line is not None:
        print(line)
    if args.out is None:
        if line is None:
            sys.stdout.write(text)
        return 0

    manifest = RunManifest(
        command=args.command,
        config=cfg.snapshot(),
        master_seed=cfg.get("experiment", "master_seed"),
        version=__version__,
        backend=kernels.BACKEND,
        started=started,
        finished=_now(),
        outputs=[args.out],
        notes=notes,
    )
    try:
        ensure_parent(args.out)
        write_text(text, args.out)
        write_text(manifest.to_json(), manifest_path(args.out))
    except OSError as exc:
        print(f"cplab {args.command}: cannot write output: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
