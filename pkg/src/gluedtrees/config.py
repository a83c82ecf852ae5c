"""Experiment configuration: YAML documents checked against a JSON schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml
from jsonschema import Draft202012Validator

from .errors import ConfigError
from .harness import STRATEGIES

KINDS = (
    "graph-audit", "embed-exact", "embed-mc", "pair-audit",
    "bounds-table", "strategy-sweep", "worst-tree-search",
)
MAX_N = {"graph-audit": 24, "embed-exact": 12, "embed-mc": 24, "pair-audit": 24}
MAX_EXACT_T = 22


def load_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("config_schema.json").read_text())


@dataclass(frozen=True)
class Diagnostic:
    field: str
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.field or '<root>'}: {self.message}"


@dataclass
class ExperimentConfig:
    kind: str
    master_seed: int
    params: dict[str, Any]
    output_dir: str = "reports"
    output_format: str = "both"
    lines: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, doc: dict, lines=None) -> "ExperimentConfig":
        out = doc.get("output") or {}
        return cls(
            kind=doc["kind"],
            master_seed=doc["master_seed"],
            params=dict(doc["params"]),
            output_dir=out.get("dir", "reports"),
            output_format=out.get("format", "both"),
            lines=dict(lines or {}),
        )


def _line_map(node, prefix: str = "", out=None) -> dict[str, int]:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for key, value in node.value:
            path = f"{prefix}.{key.value}" if prefix else str(key.value)
            out[path] = key.start_mark.line + 1
            _line_map(value, path, out)
    return out


def parse_config_text(text: str) -> tuple[Any, dict[str, int]]:
    try:
        doc = yaml.safe_load(text)
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError([Diagnostic("", f"not valid YAML: {exc}", mark.line + 1 if mark else None)])
    return doc, _line_map(node) if node is not None else {}


def load_config(path) -> tuple[Any, dict[str, int]]:
    return parse_config_text(Path(path).read_text())


def expand_range(value) -> list[int]:
    if isinstance(value, int):
        return [value]
    return list(range(value["min"], value["max"] + 1, value.get("step", 1)))


def validate(doc, lines: dict[str, int] | None = None) -> list[Diagnostic]:
    """Every problem that would make :func:`experiments.run` reject ``doc``."""
    lines = lines or {}

    def diag(path: str, message: str) -> Diagnostic:
        return Diagnostic(path, message, lines.get(path))

    if not isinstance(doc, dict):
        return [diag("", "config must be a mapping")]
    out = []
    for err in sorted(Draft202012Validator(load_schema()).iter_errors(doc), key=lambda e: list(e.path)):
        path = ".".join(str(p) for p in err.absolute_path)
        msg = err.message
        if err.validator == "oneOf":
            msg = f"{err.instance!r} is neither an integer nor a {{min, max, step}} range"
        out.append(diag(path, msg))
    if out:
        return out

    kind = doc["kind"]
    params = doc["params"]
    for key in ("n", "t"):
        rng = params.get(key)
        if isinstance(rng, dict) and rng["min"] > rng["max"]:
            out.append(diag(f"params.{key}", f"empty range: min {rng['min']} > max {rng['max']}"))
    if out:
        return out

    ns = expand_range(params["n"])
    ts = expand_range(params["t"]) if "t" in params else []
    if min(ns) < 1:
        out.append(diag("params.n", "n must be >= 1"))
    if kind in MAX_N and max(ns) > MAX_N[kind]:
        out.append(diag("params.n", f"n up to {MAX_N[kind]} supported for {kind}"))
    if ts and min(ts) < 1:
        out.append(diag("params.t", "t must be >= 1"))
    if kind == "embed-exact" and ts and max(ts) > MAX_EXACT_T:
        out.append(diag("params.t", f"exact enumeration supports t <= {MAX_EXACT_T}"))
    if kind in ("bounds-table", "pair-audit") and ts:
        bad = [(n, t) for n in ns for t in ts if t >= 1 << n]
        if bad:
            n, t = bad[0]
            out.append(diag("params.t", f"domain: t={t} >= 2**n={1 << n} (bound undefined)"))
    if kind == "pair-audit" and ts and max(ts) > 64:
        out.append(diag("params.t", "pair audit supports t <= 64"))
    if kind == "strategy-sweep":
        for sid in params.get("strategies", []):
            if sid not in STRATEGIES:
                out.append(diag("params.strategies", f"unknown strategy {sid!r}"))
    return out


def check(doc, lines=None) -> ExperimentConfig:
    problems = validate(doc, lines)
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig.from_dict(doc, lines)
