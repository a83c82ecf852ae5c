"""Config-driven experiment runs and report writing.

Reports are pure functions of (config, seed, package version): rows are
emitted in parameter order, floats via ``repr`` and JSON with sorted keys.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

from . import __version__
from .bounds import CSV_COLUMNS, bounds_table, floor_root_pow2, total_win_bound
from .config import ExperimentConfig, expand_range
from .embedding import enumerate_win_probability, estimate_expected_win, graph_seed, pair_audit, search_worst_tree
from .graph import audit_graph, build_graph
from .harness import builtin_strategies, strategy_record, success_rate
from .rng import derive_key
from .trees import make_tree

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_VIOLATION = 4

REPORT_FORMAT_VERSION = 1

COLUMNS = {
    "graph-audit": ("n", "seed_index", "graph_seed", "vertices", "vertex_count_ok",
                    "degrees_ok", "widths_ok", "symmetric", "cycle_length", "cycle_ok"),
    "embed-exact": ("n", "graph_index", "graph_seed", "shape", "t", "probability", "value"),
    "embed-mc": ("n", "t", "shape", "trials", "successes", "mean", "stderr", "ci99_upper",
                 "bound_total", "violation"),
    "pair-audit": ("n", "t", "a", "b", "mean", "ci99_upper", "pair_bound", "violation"),
    "bounds-table": CSV_COLUMNS,
    "strategy-sweep": ("n", "strategy_id", "budget", "episodes", "successes", "mean",
                       "ci99_upper", "master_seed", "bound_total", "violation"),
    "worst-tree-search": ("n", "t", "parent", "trials", "successes", "mean", "stderr",
                          "ci99_upper", "bound_total", "violation"),
}


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return v


def _graph_audit(cfg, workers):
    rows = []
    for n in expand_range(cfg.params["n"]):
        for s in range(cfg.params["seeds"]):
            seed = derive_key(cfg.master_seed, n, s)
            audit = audit_graph(build_graph(n, seed))
            audit.pop("n")
            row = {"n": n, "seed_index": s, "graph_seed": seed, **audit}
            row["violation"] = not all(audit[k] for k in
                                       ("vertex_count_ok", "degrees_ok", "widths_ok", "symmetric", "cycle_ok"))
            rows.append(row)
    return rows


def _embed_exact(cfg, workers):
    p = cfg.params
    rows = []
    for n in expand_range(p["n"]):
        for gi in range(p["graphs"]):
            seed = graph_seed(cfg.master_seed, gi)
            g = build_graph(n, seed)
            for t in expand_range(p["t"]):
                tree = make_tree(p["shape"], t, p.get("tree_seed", 0))
                prob = enumerate_win_probability(g, tree)
                rows.append({"n": n, "graph_index": gi, "graph_seed": seed, "shape": p["shape"],
                             "t": t, "probability": str(prob), "value": float(prob)})
    return rows


def _bound_or_none(t, n):
    return total_win_bound(t, n).total if 1 <= t < (1 << n) else None


def _embed_mc(cfg, workers):
    p = cfg.params
    rows = []
    for n in expand_range(p["n"]):
        for t in expand_range(p["t"]):
            tree = make_tree(p["shape"], t, p.get("tree_seed", 0))
            est = estimate_expected_win(n, tree, p["graph_trials"], p["embed_trials"],
                                        cfg.master_seed, workers=workers)
            bound = _bound_or_none(t, n)
            rows.append({"n": n, "t": t, "shape": p["shape"], "trials": est.trials,
                         "successes": est.successes, "mean": est.mean, "stderr": est.stderr,
                         "ci99_upper": est.ci99_upper, "bound_total": bound,
                         "violation": bound is not None and est.ci99_upper > bound})
    return rows


def _pair_audit(cfg, workers):
    from .bounds import ancestor_sum, pair_bound_both_sides

    p = cfg.params
    rows = []
    for n in expand_range(p["n"]):
        for t in expand_range(p["t"]):
            tree = make_tree(p["shape"], t, p.get("tree_seed", 0))
            freq, improper = pair_audit(n, tree, p["graph_trials"], p["embed_trials"], cfg.master_seed)
            bound = (1 << (n + 2)) * pair_bound_both_sides(n, t) + ancestor_sum(n, t)
            total = 0.0
            for (a, b), est in freq.items():
                total += est.mean
                rows.append({"n": n, "t": t, "a": a, "b": b, "mean": est.mean,
                             "ci99_upper": est.ci99_upper, "pair_bound": bound,
                             "violation": est.ci99_upper > bound})
            union_ok = total >= improper.mean - 3 * improper.stderr
            rows.append({"n": n, "t": t, "a": "sum", "b": "improper", "mean": total,
                         "ci99_upper": improper.mean, "pair_bound": None, "violation": not union_ok})
    return rows


def _bounds_table(cfg, workers):
    t = cfg.params.get("t")
    ns = expand_range(cfg.params["n"])
    if t is None:
        reports = bounds_table(ns)
    else:
        reports = [r for tt in expand_range(t) for r in bounds_table(ns, tt)]
    return [{**r.csv_row(), "violation": False} for r in reports]


def _strategy_sweep(cfg, workers):
    p = cfg.params
    rows = []
    for n in expand_range(p["n"]):
        for sid in p.get("strategies") or builtin_strategies():
            est = success_rate(n, sid, p["budget"], p["episodes"], cfg.master_seed, workers=workers)
            bound = _bound_or_none(p["budget"] + 1, n)
            rows.append({**strategy_record(est), "bound_total": bound,
                         "violation": bound is not None and est.ci99_upper > bound})
    return rows


def _worst_tree(cfg, workers):
    p = cfg.params
    rows = []
    for n in expand_range(p["n"]):
        for t in expand_range(p["t"]):
            tree, est = search_worst_tree(n, t, p["candidates"], p["graph_trials"],
                                          p["embed_trials"], cfg.master_seed, workers=workers)
            bound = _bound_or_none(t, n)
            rows.append({"n": n, "t": t, "parent": json.dumps(list(tree.parent)),
                         "trials": est.trials, "successes": est.successes, "mean": est.mean,
                         "stderr": est.stderr, "ci99_upper": est.ci99_upper, "bound_total": bound,
                         "violation": bound is not None and est.mean > bound + 3 * est.stderr})
    return rows


RUNNERS = {
    "graph-audit": _graph_audit,
    "embed-exact": _embed_exact,
    "embed-mc": _embed_mc,
    "pair-audit": _pair_audit,
    "bounds-table": _bounds_table,
    "strategy-sweep": _strategy_sweep,
    "worst-tree-search": _worst_tree,
}


def render_csv(kind: str, rows: list[dict]) -> str:
    buf = io.StringIO()
    cols = COLUMNS[kind]
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(row.get(k)) for k in cols})
    return buf.getvalue()


def render_json(cfg: ExperimentConfig, rows: list[dict]) -> str:
    doc = {
        "format_version": REPORT_FORMAT_VERSION,
        "artifact_version": __version__,
        "kind": cfg.kind,
        "master_seed": cfg.master_seed,
        "params": cfg.params,
        "violations": sum(bool(r.get("violation")) for r in rows),
        "rows": rows,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def run(cfg: ExperimentConfig, out_dir=None, workers: int = 1) -> tuple[int, list[Path]]:
    """Run one experiment and write its reports; returns (exit status, files)."""
    rows = RUNNERS[cfg.kind](cfg, workers)
    out = Path(out_dir or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = cfg.kind.replace("-", "_")
    written = []
    if cfg.output_format in ("csv", "both"):
        path = out / f"{stem}.csv"
        path.write_text(render_csv(cfg.kind, rows))
        written.append(path)
    if cfg.output_format in ("json", "both"):
        path = out / f"{stem}.json"
        path.write_text(render_json(cfg, rows))
        written.append(path)
    violations = [r for r in rows if r.get("violation")]
    for r in violations:
        log.error("bound violation: %s", {k: r[k] for k in COLUMNS[cfg.kind] if k in r})
    return (EXIT_VIOLATION if violations else EXIT_OK), written
