"""Experiment configuration, planning and execution of the theorem suites."""

from __future__ import annotations

import csv
import io as _io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

from .extension import ModeProfile
from .io import problem_to_dict, write_json
from .theorems import comparison, extension_checks, operators, regularity, variational
from .theorems.common import configure, settings
from .theorems.report import FAIL, INFO, PASS, VACUOUS_PASS, WEAK_PASS, merge_reports

SUITE_NAMES = ("operators", "vi", "regularity", "comparison", "extension")
VERSION = "0.1.0"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    suite: str = "all"
    sizes: list = field(default_factory=lambda: [31])
    s: list = field(default_factory=lambda: [0.25, 0.5, 0.75])
    seed: int = 0
    tol: float = 1e-8
    floor: float = 1e-12
    out: str = "results"
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.suite not in SUITE_NAMES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}")
        if not self.sizes or any(int(n) != n or n < 3 for n in self.sizes):
            raise ConfigError("grid sizes must be integers >= 3")
        if not self.s or any(not 0.0 < x <= 1.0 for x in self.s):
            raise ConfigError("s values must lie in (0, 1]")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not self.tol > 0 or not self.floor >= 0:
            raise ConfigError("tolerances must be positive")
        if int(self.jobs) < 1:
            raise ConfigError("jobs must be >= 1")
        self.sizes = [int(n) for n in self.sizes]
        self.s = [float(x) for x in self.s]
        self.seed = int(self.seed)
        self.jobs = int(self.jobs)
        return self

    @property
    def suites(self) -> tuple[str, ...]:
        return SUITE_NAMES if self.suite == "all" else (self.suite,)

    def body_dict(self) -> dict:
        """Config entries that determine the results (not ``out`` or ``jobs``)."""
        d = asdict(self)
        d.pop("out")
        d.pop("jobs")
        return d

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def plan(config: ExperimentConfig) -> list[tuple]:
    """Jobs ``(suite, size, s)`` in execution order; size ``None`` marks size-free jobs."""
    jobs = []
    for suite in config.suites:
        if suite == "extension":
            jobs.append((suite, None, 0.5))
        for n in config.sizes:
            for s in config.s:
                if suite == "comparison" and s >= 1.0:
                    continue
                if suite == "extension" and s >= 1.0:
                    continue
                jobs.append((suite, n, s))
    return jobs


def describe(config: ExperimentConfig) -> str:
    jobs = plan(config)
    lines = ["plan", f"  seed: {config.seed}", f"  tolerance: {config.tol:g}",
             f"  strictness floor: {config.floor:g}", f"  sizes: {config.sizes}",
             f"  s: {config.s}", f"  jobs: {len(jobs)}", "  suites:"]
    for suite in SUITE_NAMES:
        mark = "" if suite in config.suites else " (skipped)"
        mine = [j for j in jobs if j[0] == suite]
        lines.append(f"    {suite}{mark}: {len(mine)} instances")
        for _, n, s in mine:
            lines.append(f"      size={'-' if n is None else n} s={s:g}")
    return "\n".join(lines) + "\n"


class _Sink:
    def __init__(self):
        self.items = []

    def __call__(self, name, *objs):
        if len(objs) == 1 and isinstance(objs[0], ModeProfile):
            buf = _io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["y", "theta"])
            for a, b in zip(objs[0].y, objs[0].theta):
                w.writerow([repr(float(a)), repr(float(b))])
            self.items.append(("profiles", name + ".csv", buf.getvalue()))
        else:
            problem, sol = objs
            payload = {"problem": problem_to_dict(problem, sol.method), "solution": sol.to_dict()}
            self.items.append(("solutions", name + ".json", payload))


def run_job(job, seed: int, tol: float, floor: float):
    """Run one job; returns report dicts and data dumps.  Safe in a worker process."""
    configure(tol=tol, floor=floor)
    suite, n, s = job
    sink = _Sink()
    if suite == "operators":
        reps = operators.check_operator_theorems(seed, [n], [s])
    elif suite == "vi":
        reps = variational.check_vi_theorems(seed, [n], [s], sink)
    elif suite == "regularity":
        reps = regularity.check_regularity_theorems(seed, [n], [s], sink)
    elif suite == "comparison":
        reps = comparison.check_navier_dirichlet(seed, [n], [s], sink)
    elif n is None:
        reps = extension_checks.check_half_trace()
    else:
        reps = extension_checks.check_extension(seed, n, s, sink)
    return list(reps), sink.items


def execute(config: ExperimentConfig):
    """Run all jobs and merge in deterministic order; returns ``(reports, dumps)``."""
    jobs = plan(config)
    args = [(j, config.seed, config.tol, config.floor) for j in jobs]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run_job, *zip(*args)))
    else:
        saved = settings()
        try:
            results = [run_job(*a) for a in args]
        finally:
            configure(**saved)
    reports, dumps, seen = [], [], set()
    for reps, items in results:
        for r in reps:
            key = json.dumps(r.to_dict(), sort_keys=True)
            if key not in seen:
                seen.add(key)
                reports.append(r)
        dumps += items
    return merge_reports(reports), sorted(dumps, key=lambda t: (t[0], t[1]))


_RANK = {PASS: 0, VACUOUS_PASS: 1, WEAK_PASS: 2, FAIL: 3}


def summarize(reports) -> list[dict]:
    """One row per (theorem, size, s): instance count, worst margin, worst status."""
    rows = {}
    for r in reports:
        key = (r.theorem, r.instance.get("size"), r.instance.get("s"))
        row = rows.setdefault(key, {"theorem": key[0], "size": key[1], "s": key[2],
                                    "instances": 0, "worst_margin": None, "status": None})
        row["instances"] += int(r.instance.get("instances", 1))
        w = r.worst
        if w is not None and (row["worst_margin"] is None or w < row["worst_margin"]):
            row["worst_margin"] = w
        if r.status == INFO:
            row["status"] = row["status"] or INFO
        elif row["status"] in (None, INFO) or _RANK[r.status] > _RANK[row["status"]]:
            row["status"] = r.status
    return [rows[k] for k in sorted(rows, key=lambda k: (k[0], -1 if k[1] is None else k[1], k[2]))]


def report_body(config: ExperimentConfig, reports) -> dict:
    statuses = [r.status for r in reports]
    return {"config": config.body_dict(),
            "counts": {st: statuses.count(st) for st in (PASS, WEAK_PASS, VACUOUS_PASS, FAIL, INFO)},
            "passed": FAIL not in statuses,
            "reports": [r.to_dict() for r in reports]}


def body_json(body: dict) -> str:
    return json.dumps(body, indent=2, sort_keys=True)


def write_outputs(config: ExperimentConfig, reports, dumps, command: str = "") -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory {out} is not writable")
    header = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
              "version": VERSION, "command": command}
    body = report_body(config, reports)
    with open(out / "report.json", "w") as fh:
        fh.write('{\n"header": ' + json.dumps(header, sort_keys=True) + ',\n"body": ')
        fh.write(body_json(body))
        fh.write("\n}\n")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, ["theorem", "size", "s", "instances", "worst_margin", "status"],
                           lineterminator="\n")
        w.writeheader()
        for row in summarize(reports):
            row = dict(row)
            if row["worst_margin"] is not None:
                row["worst_margin"] = f"{row['worst_margin']:.6e}"
            w.writerow(row)
    for sub, name, payload in dumps:
        (out / sub).mkdir(exist_ok=True)
        if isinstance(payload, str):
            (out / sub / name).write_text(payload)
        else:
            write_json(out / sub / name, payload)
    return out


def read_body(path) -> dict:
    with open(path) as fh:
        return json.load(fh)["body"]
