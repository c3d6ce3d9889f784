"""Experiment manifests and the reproduction harness.

A manifest pins one experiment: the graph spec, the parameter record, and
the output destination.  Running it produces a deterministic artifact
directory; every output file embeds the manifest hash and tool version, so
byte-identical manifests yield byte-identical artifacts.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import bounds as bnd
from .energy import p_resistance, max_resistance
from .errors import BadArguments, IoError, MissingParam
from .graphs import (
    DEFAULT_SIZE_CAP,
    GraphSpec,
    annulus_problem,
    build_ball,
    build_cayley_graph,
    dirichlet_problem,
    growth_profile,
    spec_torus,
)
from .isoperimetry import exact_profile, verify_csc, verify_cyclic_edge_iso
from .textspec import (
    document_hash,
    emit_document,
    graphspec_from_doc,
    graphspec_hash,
    graphspec_items,
    parse_document,
)
from .walks import RNG_NAME, escape_profile

TOOL_VERSION = "vtres-0.1.0"

EXPERIMENTS = ("resistance", "escape", "growth", "isoperimetry", "sandwich",
               "table1", "sharpness_nw", "var_converse")

# experiment -> {param: (type, required)}; unknown keys are rejected
_PARAM_SCHEMA: dict[str, dict[str, tuple[str, bool]]] = {
    "resistance": {"p": ("float_list", True), "r": ("int_list", False),
                   "transitive": ("int", False), "dump_potential": ("int", False)},
    "escape": {"r": ("int_list", True), "trials": ("int", True), "seed": ("int", True)},
    "growth": {},
    "isoperimetry": {"max_n": ("int", False)},
    "sandwich": {"p": ("float_list", True), "r_min": ("int", True),
                 "r_max": ("int", True)},
    "table1": {"n2": ("int_list", False), "n3": ("int_list", False),
               "nlin": ("int_list", False), "eps": ("float", False)},
    "sharpness_nw": {"p": ("float_list", True), "d": ("int_list", True),
                     "k": ("int", False), "n": ("int_list", True)},
    "var_converse": {"n": ("int", True), "r": ("int_list", True)},
}

_NEEDS_GRAPH = {"resistance", "escape", "growth", "isoperimetry", "sandwich",
                "var_converse"}


@dataclass(frozen=True)
class ExperimentManifest:
    experiment: str
    graph: Optional[GraphSpec]
    params: dict
    out_path: str = "out"
    out_format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise BadArguments(f"unknown experiment {self.experiment!r}")
        if self.out_format not in ("csv", "structured-text", "plotdata"):
            raise BadArguments(f"unknown format {self.out_format!r}")
        schema = _PARAM_SCHEMA[self.experiment]
        for key in self.params:
            if key not in schema:
                raise BadArguments(
                    f"parameter {key!r} is not consumed by {self.experiment}")
        for key, (typ, required) in schema.items():
            if key not in self.params:
                if required:
                    raise MissingParam(f"{self.experiment} needs parameter {key!r}")
                continue
            _check_type(key, self.params[key], typ)
        if self.experiment in _NEEDS_GRAPH and self.graph is None:
            raise BadArguments(f"{self.experiment} needs a graph spec")


def _check_type(key: str, value, typ: str) -> None:
    ok = {
        "int": lambda v: isinstance(v, int),
        "float": lambda v: isinstance(v, (int, float)),
        "int_list": lambda v: isinstance(v, list) and all(isinstance(x, int) for x in v),
        "float_list": lambda v: isinstance(v, list)
                                and all(isinstance(x, (int, float)) for x in v),
        "str": lambda v: isinstance(v, str),
    }[typ]
    if not ok(value):
        raise BadArguments(f"parameter {key!r} must have type {typ}")


_PARAM_ORDER = ("p", "r", "r_min", "r_max", "n", "n2", "n3", "nlin", "d", "k",
                "eps", "trials", "seed", "max_n", "transitive", "dump_potential")


def manifest_items(man: ExperimentManifest) -> list[tuple[str, object]]:
    items: list[tuple[str, object]] = [("experiment", man.experiment)]
    if man.graph is not None:
        items.extend(graphspec_items(man.graph, prefix="graph."))
    for key in _PARAM_ORDER:
        if key in man.params:
            v = man.params[key]
            items.append((f"params.{key}", list(v) if isinstance(v, list) else v))
    items.append(("output.path", man.out_path))
    items.append(("output.format", man.out_format))
    return items


def emit_manifest(man: ExperimentManifest) -> str:
    return emit_document(manifest_items(man))


def parse_manifest(text: str) -> ExperimentManifest:
    doc = parse_document(text)
    if "experiment" not in doc:
        raise BadArguments("manifest needs an experiment key")
    experiment = str(doc.pop("experiment"))
    graph = None
    if any(k.startswith("graph.") for k in doc):
        graph = graphspec_from_doc(doc, prefix="graph.")
        for k in list(doc):
            if k.startswith("graph."):
                doc.pop(k)
    params = {}
    for k in list(doc):
        if k.startswith("params."):
            params[k[len("params."):]] = doc.pop(k)
    out_path = str(doc.pop("output.path", "out"))
    out_format = str(doc.pop("output.format", "csv"))
    if doc:
        raise BadArguments(f"unknown manifest keys: {sorted(doc)}")
    return ExperimentManifest(experiment=experiment, graph=graph, params=params,
                              out_path=out_path, out_format=out_format)


def manifest_hash(man: ExperimentManifest) -> str:
    return document_hash(emit_manifest(man))


# ---------------------------------------------------------------------------
# Result tables and emission
# ---------------------------------------------------------------------------

@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[tuple]
    meta: dict = field(default_factory=dict)


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, tuple):
        return "-".join(str(int(x)) for x in v)
    return str(v)


def _header_lines(man_hash: str) -> list[str]:
    return [f"# manifest_hash = {man_hash}", f"# tool_version = {TOOL_VERSION}"]


def emit(results: list[Table], out_format: str, out_dir: str, man_hash: str) -> list[str]:
    """Write result tables as csv, structured-text, or plotdata files."""
    if not results:
        raise IoError("results are empty")
    ext = {"csv": "csv", "structured-text": "txt", "plotdata": "dat"}[out_format]
    paths = []
    os.makedirs(out_dir, exist_ok=True)
    for table in results:
        lines = _header_lines(man_hash)
        lines += [f"# {k} = {_fmt_cell(v)}" for k, v in sorted(table.meta.items())]
        if out_format == "csv":
            lines.append(",".join(table.columns))
            lines += [",".join(_fmt_cell(v) for v in row) for row in table.rows]
        elif out_format == "structured-text":
            lines.append(f"table = {table.name}")
            lines.append("columns = [" + ", ".join(table.columns) + "]")
            lines += ["row = [" + ", ".join(_fmt_cell(v) for v in row) + "]"
                      for row in table.rows]
        else:  # plotdata: first column is x, one series per remaining column
            for j, col in enumerate(table.columns[1:], start=1):
                lines.append(f"# series: {col}")
                lines += [f"{_fmt_cell(row[0])} {_fmt_cell(row[j])}"
                          for row in table.rows]
                lines.append("")
        path = os.path.join(out_dir, f"{table.name}.{ext}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines).rstrip("\n") + "\n")
        paths.append(path)
    return paths


def _report_table(name: str, reports: list[bnd.BoundReport],
                  param_keys: tuple[str, ...]) -> Table:
    cols = ["quantity", *param_keys, "computed", "bound", "side", "ratio", "status"]
    rows = []
    for r in reports:
        rows.append((r.quantity, *(_fmt_cell(r.params.get(k, "")) for k in param_keys),
                     r.computed, r.bound, r.side, r.ratio, r.status))
    return Table(name=name, columns=cols, rows=rows)


class RunResult(NamedTuple):
    exit_code: int
    files: list[str]
    reports: list
    metrics: dict


# ---------------------------------------------------------------------------
# Experiment implementations
# ---------------------------------------------------------------------------

def flow_items(flow) -> list[tuple[str, object]]:
    """Flat structured-text record of a FlowResult and its potential."""
    pot = flow.potential
    items: list[tuple[str, object]] = [
        ("p", float(pot.p)),
        ("source_value", float(pot.source_value)),
        ("resistance", float(flow.resistance)),
        ("capacity", float(flow.capacity)),
        ("total_current", float(flow.total_current)),
        ("energy", float(pot.energy)),
        ("residual", float(pot.residual)),
        ("source", int(pot.problem.source)),
        ("ground", int(pot.problem.ground)),
    ]
    items += [(f"values.v{i}", float(v)) for i, v in enumerate(pot.values)]
    return items


def _run_resistance(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    ps = [float(p) for p in man.params["p"]]
    reports: list = []
    extra_docs: list[tuple[str, str]] = []
    dump = bool(man.params.get("dump_potential", 0))
    if "r" in man.params:
        rs = sorted(set(int(r) for r in man.params["r"]))
        ball = build_ball(spec, max(rs) + 1, size_cap)
        rows = []
        for p in ps:
            for r in rs:
                flow = p_resistance(dirichlet_problem(ball, r, "sphere"), p)
                rows.append((p, r, ball.beta(r), flow.resistance))
                if dump:
                    name = f"potential_p{p:g}_r{r}".replace(".", "_")
                    extra_docs.append((name, emit_document(flow_items(flow))))
        table = Table("resistance", ["p", "r", "beta_r", "resistance"], rows)
    else:
        g = build_cayley_graph(spec, size_cap)
        transitive = bool(man.params.get("transitive", 1))
        rows = []
        for p in ps:
            value, (u, v) = max_resistance(g, p, transitive=transitive)
            rows.append((p, value, u, v))
        table = Table("resistance", ["p", "max_resistance", "argmax_u", "argmax_v"], rows)
    return [table], reports, {}, extra_docs


def _run_escape(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    rs = sorted(set(int(r) for r in man.params["r"]))
    trials = int(man.params["trials"])
    seed = int(man.params["seed"])
    ball = build_ball(spec, max(rs), size_cap)
    prof = escape_profile(ball, max(rs), trials, seed)
    spec_hash = graphspec_hash(spec)
    rows = [(spec_hash, r, prof[r - 1].trials, prof[r - 1].p_hat,
             prof[r - 1].stderr, seed) for r in rs]
    table = Table("escape", ["spec_hash", "r", "trials", "p_hat", "stderr", "seed"],
                  rows, meta={"rng": RNG_NAME})
    return [table], [], {}


def _run_growth(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    if spec.radius is None:
        raise BadArguments("growth experiment needs graph.radius")
    ball = build_ball(spec, spec.radius, size_cap)
    gp = growth_profile(ball)
    rows = [(r, gp.beta[r], gp.sigma[r]) for r in range(gp.radius + 1)]
    meta = {"degree": gp.degree,
            "diameter": gp.diameter if gp.diameter is not None else "none"}
    return [Table("growth", ["r", "beta", "sigma"], rows, meta)], [], {}


def _run_isoperimetry(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    g = build_cayley_graph(spec, size_cap)
    max_n = int(man.params.get("max_n", 14))
    profile = exact_profile(g, "all_sets", max_n=max_n)
    rows = []
    for size, entry in profile.by_size.items():
        mask = sum(1 << v for v in entry.witness)
        rows.append((size, entry.min_vertex, entry.min_edge,
                     f"{mask:x}" if g.n <= 64 else ""))
    tables = [Table("profile", ["size", "min_vertex_boundary", "min_edge_boundary",
                                "witness_mask"], rows)]
    reports = verify_csc(g, max_n=max_n)
    chord_width = next((a[1] for a in spec.generators if a[0] == "chords"), None)
    if chord_width is not None and 1 <= chord_width < spec.factors[0] / 2:
        reports.append(verify_cyclic_edge_iso(spec.factors[0], chord_width,
                                              max_n=max_n))
    tables.append(_report_table("csc", reports, ("size", "n", "k")))
    return tables, reports, {}


def _run_sandwich(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    ps = [float(p) for p in man.params["p"]]
    r_min, r_max = int(man.params["r_min"]), int(man.params["r_max"])
    if not 1 <= r_min <= r_max:
        raise BadArguments("need 1 <= r_min <= r_max")
    ball = build_ball(spec, r_max + 1, size_cap)
    deg = spec.ambient_degree()
    rows = []
    metrics: dict = {}
    for p in ps:
        computed_list, upper_list, lower_list, r_list = [], [], [], []
        for r in range(r_min, r_max + 1):
            beta_r = ball.beta(r)
            flow = p_resistance(dirichlet_problem(ball, r, "sphere"), p)
            if p == 2.0:
                lower = bnd.theorem_rhs("T1_8_lower",
                                        {"r": r, "beta_r": beta_r, "deg": deg})
                upper = bnd.theorem_rhs("T1_8_upper",
                                        {"r": r, "beta_r": beta_r, "deg": deg})
            else:
                base = {"p": p, "r": r, "beta_r": beta_r, "deg": deg}
                lower = bnd.theorem_rhs("T1_10_lower", base)
                which = "T1_10_upper_int" if p == int(p) else "T1_10_upper_nonint"
                upper = bnd.theorem_rhs(which, base)
            rows.append((p, r, beta_r, lower, flow.resistance, upper,
                         lower / flow.resistance, flow.resistance / upper))
            r_list.append(r)
            computed_list.append(flow.resistance)
            lower_list.append(lower)
            upper_list.append(upper)
        key = "p" + f"{p:g}".replace(".", "_")
        regime = [c / math.log(r) for c, r in zip(computed_list, r_list) if r >= 2]
        if regime:
            metrics[f"{key}.log_regime_spread"] = max(regime) / min(regime)
        if len(r_list) >= 2 and r_list[0] >= 2:
            metrics[f"{key}.slope_computed"] = bnd.loglog_slope(
                [math.log(r) for r in r_list], computed_list)
            metrics[f"{key}.slope_upper"] = bnd.loglog_slope(
                [math.log(r) for r in r_list], upper_list)
        metrics[f"{key}.max_lower_over_computed"] = max(
            l / c for l, c in zip(lower_list, computed_list))
        metrics[f"{key}.max_computed_over_upper"] = max(
            c / u for c, u in zip(computed_list, upper_list))
    table = Table("sandwich", ["p", "r", "beta_r", "lower_rhs", "computed",
                               "upper_rhs", "lower_over_computed",
                               "computed_over_upper"], rows)
    return [table], [], metrics


def _table1_row_specs(man: ExperimentManifest):
    eps = float(man.params.get("eps", 0.5))
    for n in man.params.get("n2", []):
        yield 2, int(n), 1
    for n in man.params.get("n3", []):
        yield 3, int(n), 1
    for n in man.params.get("nlin", []):
        yield 1, int(n), max(2, math.ceil(int(n) ** (1.0 - eps)))


def _torus_with_fiber(d: int, n: int, k: int) -> GraphSpec:
    if k == 1:
        return spec_torus(*([n] * d))
    return spec_torus(*([n] * d + [k]), full_last=True)


def _run_table1(man: ExperimentManifest, size_cap: int):
    p = 2.0
    rows = []
    reports = []
    metrics: dict = {}
    groups: dict[int, list[float]] = {}
    for d, n, k in _table1_row_specs(man):
        if n % 2:
            raise BadArguments("table1 needs even n")
        spec = _torus_with_fiber(d, n, k)
        half = n // 2
        ball = build_ball(spec, half, size_cap)
        family = bnd.sphere_cutsets(ball, half)
        nw = bnd.nash_williams_bound(family, p)
        exact = p_resistance(dirichlet_problem(ball, half - 1, "sphere"), p).resistance
        if d == int(p):
            regime, regime_value = "log_n", math.log(n)
        elif d > p:
            regime, regime_value = "const", 1.0
        else:
            regime, regime_value = "poly", n ** (p - d) / k
        reports.append(bnd.make_report(
            "nash_williams_vs_exact", computed=exact, bound=nw, side="lower",
            params={"p": p, "d": d, "k": k, "n": n}))
        rows.append((p, d, k, n, spec.ambient_degree(), nw, exact, nw / exact,
                     regime, regime_value, nw / regime_value))
        groups.setdefault(d, []).append(nw / regime_value)
    for d, vals in sorted(groups.items()):
        metrics[f"d{d}.regime_spread"] = max(vals) / min(vals)
    table = Table("table1", ["p", "d", "k", "n", "deg", "nw_bound", "exact",
                             "nw_over_exact", "regime", "regime_value",
                             "nw_over_regime"], rows)
    return [table], reports, metrics


def _run_sharpness_nw(man: ExperimentManifest, size_cap: int):
    k = int(man.params.get("k", 1))
    rows = []
    for p in man.params["p"]:
        p = float(p)
        for d in man.params["d"]:
            for n in man.params["n"]:
                d, n = int(d), int(n)
                if n % 2:
                    raise BadArguments("sharpness_nw needs even n")
                spec = _torus_with_fiber(d, n, k)
                half = n // 2
                ball = build_ball(spec, half, size_cap)
                family = bnd.sphere_cutsets(ball, half)
                measured = bnd.nash_williams_bound(family, p)
                exponent = (1.0 - d) / (p - 1.0)
                formula = (1.0 / k) * sum(
                    i ** exponent for i in range(1, half + 1)) ** (p - 1.0)
                rows.append((p, d, k, n, measured, formula, measured / formula))
    table = Table("sharpness_nw", ["p", "d", "k", "n", "nw_measured",
                                   "nw_formula", "measured_over_formula"], rows)
    return [table], [], {}


def _run_var_converse(man: ExperimentManifest, size_cap: int):
    spec = man.graph
    n = int(man.params["n"])
    rs = sorted(set(int(r) for r in man.params["r"]))
    if rs[0] <= n:
        raise BadArguments("need every r > n")
    ball = build_ball(spec, max(rs), size_cap)
    deg = spec.ambient_degree()
    beta_n = ball.beta(n)
    rows = []
    regime = []
    for r in rs:
        computed = p_resistance(annulus_problem(ball, n, r), 2.0).resistance
        rhs = bnd.theorem_rhs("T_var_converse",
                              {"n": n, "r": r, "beta_n": beta_n, "deg": deg})
        v = computed / math.log(r / n)
        regime.append(v)
        rows.append((n, r, beta_n, computed, rhs, computed / rhs, v))
    metrics = {"log_regime_spread": max(regime) / min(regime)}
    table = Table("var_converse", ["n", "r", "beta_n", "computed", "rhs",
                                   "computed_over_rhs", "computed_over_log"], rows)
    return [table], [], metrics


_RUNNERS: dict[str, Callable] = {
    "resistance": _run_resistance,
    "escape": _run_escape,
    "growth": _run_growth,
    "isoperimetry": _run_isoperimetry,
    "sandwich": _run_sandwich,
    "table1": _run_table1,
    "sharpness_nw": _run_sharpness_nw,
    "var_converse": _run_var_converse,
}


def run(man: ExperimentManifest, base_dir: Optional[str] = None,
        size_cap: int = DEFAULT_SIZE_CAP) -> RunResult:
    """Execute a manifest and write its artifact directory.

    Exit code 0 means every contained report PASSed and every solve
    converged; 1 means some report FAILed.  Validation and convergence
    errors raise and are turned into exit code 2 by the CLI.
    """
    out = _RUNNERS[man.experiment](man, size_cap)
    tables, reports, metrics = out[:3]
    extra_docs = out[3] if len(out) > 3 else []
    man_hash = manifest_hash(man)
    out_dir = os.path.join(base_dir, man.out_path) if base_dir else man.out_path
    files = emit(tables, man.out_format, out_dir, man_hash)
    for name, body in extra_docs:
        path = os.path.join(out_dir, f"{name}.txt")
        with open(path, "w") as fh:
            fh.write("\n".join(_header_lines(man_hash)) + "\n" + body)
        files.append(path)

    failed = [r for r in reports if r.status == "FAIL"]
    summary_items: list[tuple[str, object]] = [
        ("experiment", man.experiment),
        ("status", "FAIL" if failed else "PASS"),
        ("checks.total", len(reports)),
        ("checks.failed", len(failed)),
    ]
    for key in sorted(metrics):
        summary_items.append((f"metrics.{key}", metrics[key]))
    summary_path = os.path.join(out_dir, "summary.txt")
    with open(summary_path, "w") as fh:
        fh.write("\n".join(_header_lines(man_hash)) + "\n")
        fh.write(emit_document(summary_items))
    files.append(summary_path)
    return RunResult(exit_code=1 if failed else 0, files=files,
                     reports=reports, metrics=metrics)
