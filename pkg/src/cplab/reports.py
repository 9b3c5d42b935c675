"""Configuration files, result serialisation and run manifests.

Configuration is an INI file with a fixed set of sections and keys (see
``SCHEMA``). Unknown sections or keys are rejected. A run manifest stores
the fully resolved configuration, so it can be passed back as ``--config``
to replay a run.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import os
from dataclasses import dataclass

import numpy as np

from .lemma import ExperimentSummary, LemmaRunConfig, SummaryRow
from .model import ConfigurationError, Dataset, NoiseSpec, PenaltySpec, TrueModel
from .segmentation import SegmentationConfig
from .simulation import DesignSpec, TwoSegmentSpec
from .solvers import SolverSettings


def _int(s):
    return int(s)


def _float(s):
    v = float(s)
    if not np.isfinite(v):
        raise ValueError("not finite")
    return v


def _floats(s):
    return tuple(_float(a) for a in s.split(",") if a.strip())


def _ints(s):
    return tuple(int(a) for a in s.split(",") if a.strip())


def _matrix(s):
    rows = [r for r in s.split(";") if r.strip()]
    return tuple(_floats(r) for r in rows)


def _opt(parser):
    def parse(s):
        return None if s.strip() == "" else parser(s)
    return parse


def _choice(*options):
    def parse(s):
        if s not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return s
    return parse


# section -> key -> (parser, default text)
SCHEMA = {
    "model": {
        "n": (_int, "1024"),
        "u": (_float, "0.8"),
        "v": (_float, "0.2"),
        "delta": (_float, "0.05"),
        "c0": (_float, "1"),
        "phi1": (_floats, "1,0"),
        "phi3": (_floats, "1,1"),
        "alternative": (_choice("local", "fixed"), "local"),
        "fixed_phi2": (_opt(_floats), ""),
        "phis": (_matrix, "1,0; -1,0.5"),
        "changepoints": (_ints, "512"),
    },
    "design": {
        "kind": (_choice("iid_gaussian", "bounded_uniform", "fixed_matrix"), "iid_gaussian"),
        "matrix": (str, ""),
    },
    "noise": {
        "distribution": (_choice("gaussian", "laplace", "student_t"), "gaussian"),
        "sigma": (_float, "1"),
        "df": (_float, "5"),
    },
    "penalty": {
        "gamma": (_float, "1"),
        "scale_c": (_float, "1"),
    },
    "solver": {
        "max_iterations": (_int, "10000"),
        "tolerance": (_float, "1e-10"),
        "multistart_count": (_int, "8"),
        "step_shrink": (_float, "0.5"),
    },
    "experiment": {
        "n_grid": (_ints, "1024,4096,16384"),
        "replications": (_int, "200"),
        "master_seed": (_int, "0"),
        "quantile_levels": (_floats, "0.5,0.9,0.95"),
    },
    "segmentation": {
        "k": (_int, "1"),
        "min_segment_length": (_opt(_int), ""),
        "u": (_opt(_float), ""),
        "changepoints": (_ints, ""),
    },
    "data": {
        "path": (str, ""),
    },
    "output": {
        "format": (_choice("csv", "json"), "csv"),
    },
}


class Config:
    """Resolved configuration: every schema key mapped to its text value."""

    def __init__(self, values: dict[str, dict[str, str]] | None = None):
        self.values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
        for sec, keys in (values or {}).items():
            for key, text in keys.items():
                self.set(sec, key, text)

    def set(self, section: str, key: str, text) -> None:
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigurationError(f"unknown config key {section}.{key}")
        text = str(text).strip()
        self.values[section][key] = text
        self.get(section, key)

    def get(self, section: str, key: str):
        parser, _ = SCHEMA[section][key]
        text = self.values[section][key]
        try:
            return parser(text)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad value for {section}.{key}: {text!r} ({exc})") from None

    def snapshot(self) -> dict[str, dict[str, str]]:
        return {sec: dict(keys) for sec, keys in self.values.items()}

    # typed views -----------------------------------------------------------

    def penalty(self) -> PenaltySpec:
        return PenaltySpec(self.get("penalty", "gamma"), self.get("penalty", "scale_c"))

    def solver(self) -> SolverSettings:
        return SolverSettings(
            self.get("solver", "max_iterations"),
            self.get("solver", "tolerance"),
            self.get("solver", "multistart_count"),
            self.get("solver", "step_shrink"),
        )

    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.get("noise", "distribution"), self.get("noise", "sigma"), self.get("noise", "df"))

    def design(self, p: int) -> DesignSpec:
        kind = self.get("design", "kind")
        if kind == "fixed_matrix":
            path = self.get("design", "matrix")
            if not path:
                raise ConfigurationError("design.matrix must name a CSV file for fixed_matrix designs")
            try:
                matrix = np.loadtxt(path, delimiter=",", ndmin=2)
            except OSError as exc:
                raise ConfigurationError(f"design.matrix: cannot read {path!r} ({exc})") from None
            return DesignSpec(kind, p, matrix)
        return DesignSpec(kind, p)

    def two_segment_spec(self) -> TwoSegmentSpec:
        return TwoSegmentSpec(
            n=self.get("model", "n"),
            phi1=self.get("model", "phi1"),
            phi3=self.get("model", "phi3"),
            u=self.get("model", "u"),
            v=self.get("model", "v"),
            delta=self.get("model", "delta"),
            alternative=self.get("model", "alternative"),
            fixed_phi2=self.get("model", "fixed_phi2"),
        )

    def lemma_config(self) -> LemmaRunConfig:
        spec = self.two_segment_spec()
        return LemmaRunConfig(
            spec=spec,
            n_grid=self.get("experiment", "n_grid"),
            replications=self.get("experiment", "replications"),
            penalty=self.penalty(),
            solver=self.solver(),
            master_seed=self.get("experiment", "master_seed"),
            quantile_levels=self.get("experiment", "quantile_levels"),
            design=self.design(spec.p),
            noise=self.noise(),
        )

    def true_model(self) -> TrueModel:
        return TrueModel(
            n=self.get("model", "n"),
            phis=self.get("model", "phis"),
            changepoints=self.get("model", "changepoints"),
            u=self.get("model", "u"),
            c0=self.get("model", "c0"),
        )

    def segmentation(self) -> SegmentationConfig:
        return SegmentationConfig(
            k=self.get("segmentation", "k"),
            min_segment_length=self.get("segmentation", "min_segment_length"),
            penalty=self.penalty(),
            solver=self.solver(),
            u=self.get("segmentation", "u"),
        )


def load_config(path: str | None) -> Config:
    """Read an INI config or a run manifest (JSON); ``None`` gives the defaults."""
    if path is None:
        return Config()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        try:
            manifest = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"manifest {path!r} is not valid JSON ({exc})") from None
        if not isinstance(manifest, dict) or "config" not in manifest:
            raise ConfigurationError(f"manifest {path!r} has no 'config' entry")
        return Config(manifest["config"])
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config {path!r}: {exc}") from None
    return Config({sec: dict(parser[sec]) for sec in parser.sections()})


# numbers ---------------------------------------------------------------------

def format_real(v: float) -> str:
    """Shortest round-tripping decimal, never in exponent notation."""
    return np.format_float_positional(float(v), unique=True, trim="-")


def level_tag(level: float) -> str:
    return f"{level * 100:g}".replace(".", "_")


def summary_columns(levels) -> list[str]:
    cols = ["n", "n1", "n2", "replications", "bound", "satisfaction_fraction"]
    cols += [f"err_q{level_tag(q)}" for q in levels]
    cols += [f"zs_q{level_tag(q)}" for q in levels]
    return cols


def _row_values(row: SummaryRow) -> list:
    return [row.n, row.n1, row.n2, row.replications, row.bound, row.satisfaction_fraction,
            *row.err_quantiles, *row.zs_quantiles]


def render_summary(summary: ExperimentSummary, fmt: str) -> str:
    cols = summary_columns(summary.quantile_levels)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for row in summary.rows:
            writer.writerow([v if isinstance(v, int) else format_real(v) for v in _row_values(row)])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "kind": summary.kind,
            "quantile_levels": list(summary.quantile_levels),
            "rows": [dict(zip(cols, _row_values(row))) for row in summary.rows],
            "nonconverged": [row.nonconverged for row in summary.rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ConfigurationError(f"unknown output format {fmt!r}")


def write_text(text: str, path: str) -> None:
    # OSError propagates; the CLI maps it to exit code 3
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_summary(summary: ExperimentSummary, fmt: str, path: str) -> None:
    write_text(render_summary(summary, fmt), path)


def read_summary(path: str, fmt: str | None = None) -> ExperimentSummary:
    """Inverse of :func:`write_summary` (CSV files carry no kind; it reads back as ``""``)."""
    fmt = fmt or ("json" if path.endswith(".json") else "csv")
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "json":
        doc = json.loads(text)
        levels = tuple(doc["quantile_levels"])
        records = doc["rows"]
        nonconv = doc.get("nonconverged", [0] * len(records))
        kind = doc["kind"]
    else:
        records = list(csv.DictReader(io.StringIO(text)))
        err_cols = [c for c in records[0] if c.startswith("err_q")] if records else []
        levels = tuple(float(c[5:].replace("_", ".")) / 100 for c in err_cols)
        nonconv = [0] * len(records)
        kind = ""
    rows = []
    for rec, nc in zip(records, nonconv):
        rows.append(SummaryRow(
            n=int(rec["n"]),
            n1=int(rec["n1"]),
            n2=int(rec["n2"]),
            replications=int(rec["replications"]),
            bound=float(rec["bound"]),
            satisfaction_fraction=float(rec["satisfaction_fraction"]),
            err_quantiles=tuple(float(rec[f"err_q{level_tag(q)}"]) for q in levels),
            zs_quantiles=tuple(float(rec[f"zs_q{level_tag(q)}"]) for q in levels),
            nonconverged=int(nc),
        ))
    return ExperimentSummary(kind, levels, tuple(rows))


# datasets --------------------------------------------------------------------

def render_dataset(dataset: Dataset, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"x": dataset.x.tolist(), "y": dataset.y.tolist()}) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{j + 1}" for j in range(dataset.p)] + ["y"])
    for xi, yi in zip(dataset.x, dataset.y):
        writer.writerow([format_real(v) for v in xi] + [format_real(yi)])
    return buf.getvalue()


def read_dataset(path: str) -> Dataset:
    """CSV with a header row; the column named ``y`` is the response, the rest form the design."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ConfigurationError(f"data.path: cannot read {path!r} ({exc.strerror})") from None
    if len(rows) < 2:
        raise ConfigurationError(f"data.path: {path!r} needs a header and at least one row")
    header = [h.strip() for h in rows[0]]
    if "y" not in header:
        raise ConfigurationError(f"data.path: {path!r} has no 'y' column")
    try:
        values = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ConfigurationError(f"data.path: non-numeric entry in {path!r} ({exc})") from None
    iy = header.index("y")
    x = np.delete(values, iy, axis=1)
    return Dataset(x, values[:, iy])


# manifests -------------------------------------------------------------------

@dataclass
class RunManifest:
    command: str
    config: dict
    master_seed: int
    version: str
    backend: str
    started: str
    finished: str
    outputs: list
    notes: dict

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"


def manifest_path(out_path: str) -> str:
    return out_path + ".manifest.json"


def ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise OSError(f"directory {parent!r} does not exist")
