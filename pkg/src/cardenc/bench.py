"""Benchmark matrices: instances x encodings x seeds, with robust summaries."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import shlex
import statistics
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .cnf import read_dimacs, stats, write_dimacs
from .encoders import EncoderConfig
from .geometry import TestCaseSpec, build_instance
from .solve import SolveError, SolverCommand, Status, run_external, solve

SN_CONSTANT = 1.1926
RECORDS_VERSION = "cardenc-records v1"
SUMMARY_VERSION = "cardenc-summary v1"
METRICS = ("wall_time", "conflicts", "decisions")
SOLVER_ENV = "CARDENC_SOLVER"


class TooFewValues(ValueError):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- S_n

def _kth_of_two(x: Sequence[float], i: int, k: int) -> float:
    """k-th smallest (1-based) of |x[i] - x[j]|, j != i, for sorted ``x``.

    Distances to the left and to the right of ``i`` are each sorted, so this
    is a selection in the union of two sorted runs.
    """
    na, nb = i, len(x) - 1 - i

    def a(t):
        return x[i] - x[i - 1 - t]

    def b(t):
        return x[i + 1 + t] - x[i]

    lo, hi = max(0, k - nb), min(k, na)
    while lo < hi:
        take = (lo + hi) // 2
        # Too few from the left run if its next element is smaller than the right run's last taken.
        if a(take) < b(k - take - 1):
            lo = take + 1
        else:
            hi = take
    take = lo
    best = -math.inf
    if take > 0:
        best = a(take - 1)
    if k - take > 0:
        best = max(best, b(k - take - 1))
    return best


def sn_dispersion(values: Iterable[float]) -> float:
    """Rousseeuw-Croux S_n without small-sample correction.

    ``c * lowmed_i highmed_j |x_i - x_j|`` with ``c = 1.1926``; the inner
    high median of the ``m`` distances from ``x_i`` (its own zero included)
    is the ``(m//2 + 1)``-th smallest, the outer low median the
    ``((m+1)//2)``-th.  Runs in O(m log m).
    """
    x = sorted(float(v) for v in values)
    m = len(x)
    if m < 2:
        raise TooFewValues(f"S_n needs at least 2 values, got {m}")
    k = m // 2  # the self-distance is the smallest, so skip it
    inner = sorted(_kth_of_two(x, i, k) for i in range(m))
    return SN_CONSTANT * inner[(m + 1) // 2 - 1]


# ---------------------------------------------------------------- config

@dataclass
class BenchConfig:
    testcases: list[TestCaseSpec]
    encodings: list[EncoderConfig]
    repeats: int = 19
    seeds: list[int] | None = None
    solver: str = "embedded"
    seed_flag: str | None = None
    timeout: float | None = 60.0
    workers: int = 1
    metric: str = "wall_time"
    records_csv: str | None = None
    summary_csv: str | None = None
    svg: str | None = None
    instance_dir: str | None = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.seeds is None:
            self.seeds = list(range(self.repeats))
        if len(self.seeds) != self.repeats:
            raise ConfigError(f"{len(self.seeds)} seeds given for {self.repeats} repeats")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        if not self.testcases or not self.encodings:
            raise ConfigError("need at least one testcase and one encoding")

    def solver_command(self) -> SolverCommand | None:
        command = os.environ.get(SOLVER_ENV) or self.solver
        if command == "embedded":
            return None
        return SolverCommand(command, timeout=self.timeout, seed_flag=self.seed_flag)


def parse_testcase(text: str) -> TestCaseSpec:
    """``SEQ:L[:SAT|UNSAT[:ordering[:seed]]]``."""
    parts = text.strip().split(":")
    if len(parts) < 2:
        raise ConfigError(f"bad testcase {text!r}; expected SEQ:L[:POLARITY[:ORDERING[:SEED]]]")
    try:
        L = int(parts[1])
        seed = int(parts[4]) if len(parts) > 4 else 0
    except ValueError:
        raise ConfigError(f"bad testcase {text!r}") from None
    polarity = parts[2].upper() if len(parts) > 2 else "SAT"
    ordering = parts[3] if len(parts) > 3 else "row"
    return TestCaseSpec(parts[0], L, polarity, ordering, seed)


def _split_list(value: str) -> list[str]:
    return [v for v in (p.strip() for p in value.replace(",", " ").split()) if v]


def _parse_seeds(value: str) -> list[int]:
    out = []
    for item in _split_list(value):
        if ".." in item:
            lo, hi = item.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(item))
    return out


def parse_config(text: str, base: Path | None = None) -> BenchConfig:
    """Line-oriented ``key = value``; ``#`` starts a comment.

    Lists are comma or space separated; seeds accept ``a..b`` ranges.
    Relative output paths resolve against ``base``.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected key = value")
        raw[key.strip()] = value.strip()
    known = {f.name for f in fields(BenchConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        kw: dict = {
            "testcases": [parse_testcase(t) for t in _split_list(raw.pop("testcases", ""))],
            "encodings": [EncoderConfig.parse(e) for e in _split_list(raw.pop("encodings", ""))],
        }
        if "repeats" in raw:
            kw["repeats"] = int(raw.pop("repeats"))
        if "workers" in raw:
            kw["workers"] = int(raw.pop("workers"))
        if "seeds" in raw:
            kw["seeds"] = _parse_seeds(raw.pop("seeds"))
            kw.setdefault("repeats", len(kw["seeds"]))
        if "timeout" in raw:
            t = raw.pop("timeout")
            kw["timeout"] = None if t.lower() in ("none", "0", "") else float(t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for key in ("records_csv", "summary_csv", "svg", "instance_dir"):
        if key in raw:
            p = Path(raw.pop(key))
            kw[key] = str(base / p if base and not p.is_absolute() else p)
    kw.update(raw)
    return BenchConfig(**kw)


def load_config(path: str | os.PathLike) -> BenchConfig:
    p = Path(path)
    return parse_config(p.read_text(), base=p.parent)


# ---------------------------------------------------------------- running

@dataclass
class RunRecord:
    instance: str
    sequence: str
    L: int
    polarity: str
    ordering: str
    order_seed: int
    r: int
    encoding: str
    aux_vars: int
    clauses: int
    literals: int
    main_var_literals: int
    sha256: str
    seed: int
    status: str
    wall_time: float
    decisions: int | None = None
    conflicts: int | None = None
    error: str = ""

    @property
    def key(self) -> tuple[str, str]:
        return (self.instance, self.encoding)

    @property
    def completed(self) -> bool:
        return self.status in (Status.SAT.value, Status.UNSAT.value)


@dataclass
class _Job:
    dimacs: str
    seed: int
    timeout: float | None
    command: SolverCommand | None


def _run_job(job: _Job) -> tuple[str, float, int | None, int | None, str]:
    formula = read_dimacs(job.dimacs)
    try:
        if job.command is None:
            res = solve(formula, seed=job.seed, timeout=job.timeout)
        else:
            res = run_external(job.command, formula, seed=job.seed)
    except SolveError as exc:
        return "ERROR", 0.0, None, None, f"{type(exc).__name__}: {exc}"
    return res.status.value, res.wall_time, res.decisions, res.conflicts, ""


def _executor(config: BenchConfig) -> Executor | None:
    if config.workers == 1:
        return None
    if config.solver_command() is None:
        return ProcessPoolExecutor(max_workers=config.workers)
    return ThreadPoolExecutor(max_workers=config.workers)


def generate_instances(config: BenchConfig) -> list[tuple[TestCaseSpec, EncoderConfig, str]]:
    """DIMACS text for each (testcase, encoding) pair, in config order."""
    out = []
    for spec in config.testcases:
        for enc in config.encodings:
            out.append((spec, enc, write_dimacs(build_instance(spec, enc))))
    return out


def run_suite(config: BenchConfig) -> list[RunRecord]:
    """Run every instance once per seed.  Records come back in spec x seed order."""
    command = config.solver_command()
    instances = generate_instances(config)
    if config.instance_dir:
        Path(config.instance_dir).mkdir(parents=True, exist_ok=True)
    plan = []
    for spec, enc, text in instances:
        if config.instance_dir:
            name = f"{spec.name}-{enc.method}-{enc.variant}.cnf"
            Path(config.instance_dir, name).write_text(text)
        st = stats(read_dimacs(text))
        digest = hashlib.sha256(text.encode()).hexdigest()
        for seed in config.seeds:
            plan.append((spec, enc, st, digest, seed, _Job(text, seed, config.timeout, command)))

    pool = _executor(config)
    if pool is None:
        outcomes = [_run_job(p[-1]) for p in plan]
    else:
        with pool:
            outcomes = list(pool.map(_run_job, [p[-1] for p in plan]))

    records = []
    for (spec, enc, st, digest, seed, _), (status, wall, dec, conf, err) in zip(plan, outcomes):
        records.append(RunRecord(
            instance=spec.name, sequence=spec.sequence, L=spec.L, polarity=spec.polarity,
            ordering=spec.ordering, order_seed=spec.seed, r=spec.r, encoding=enc.label,
            aux_vars=st.aux_vars, clauses=st.clauses, literals=st.literals,
            main_var_literals=st.main_var_literals, sha256=digest, seed=seed,
            status=status, wall_time=wall, decisions=dec, conflicts=conf, error=err))
    return records


# ---------------------------------------------------------------- summaries

@dataclass
class Summary:
    instance: str
    encoding: str
    clauses: int
    aux_vars: int
    literals: int
    runs: int
    completed: int
    timeouts: int
    errors: int
    sat: int
    unsat: int
    metric: str
    median: float | None
    median_text: str
    sn_log10: float | None


def _metric_value(rec: RunRecord, metric: str) -> float | None:
    v = getattr(rec, metric)
    return None if v is None else float(v)


def summarize(records: Sequence[RunRecord], metric: str = "wall_time") -> list[Summary]:
    """Median and S_n of log10(metric) per (instance, encoding), over completed runs.

    When more than half of the runs did not complete the median is reported
    as ``> timeout``.  Output is sorted by key so input order does not matter.
    """
    if metric not in METRICS:
        raise ConfigError(f"unknown metric {metric!r}")
    groups: dict[tuple[str, str], list[RunRecord]] = {}
    for rec in records:
        groups.setdefault(rec.key, []).append(rec)
    out = []
    for key in sorted(groups):
        recs = groups[key]
        done = [r for r in recs if r.completed]
        values = sorted(v for v in (_metric_value(r, metric) for r in done) if v is not None)
        timeouts = sum(r.status == Status.TIMEOUT.value for r in recs)
        errors = sum(r.status == "ERROR" for r in recs)
        median = statistics.median(values) if values else None
        if 2 * len(done) < len(recs) or median is None:
            text = "> timeout"
        else:
            text = f"{median:.6g}"
        sn = None
        if len(values) >= 2:
            # Zero counts would have no logarithm; clamp to the smallest positive unit.
            floor = 1e-9 if metric == "wall_time" else 1.0
            sn = sn_dispersion(math.log10(max(v, floor)) for v in values)
        first = recs[0]
        out.append(Summary(
            instance=key[0], encoding=key[1], clauses=first.clauses, aux_vars=first.aux_vars,
            literals=first.literals, runs=len(recs), completed=len(done), timeouts=timeouts,
            errors=errors, sat=sum(r.status == "SAT" for r in recs),
            unsat=sum(r.status == "UNSAT" for r in recs), metric=metric, median=median,
            median_text=text, sn_log10=sn))
    return out


def _dump_csv(version: str, rows: Sequence, cls) -> str:
    buf = io.StringIO()
    buf.write(f"# {version}\n")
    names = [f.name for f in fields(cls)]
    writer = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        d = asdict(row)
        writer.writerow({k: ("" if d[k] is None else repr(d[k]) if isinstance(d[k], float) else d[k])
                         for k in names})
    return buf.getvalue()


def _coerce(value: str, annotation: str):
    if value == "" and "None" in annotation:
        return None
    if annotation.startswith("int"):
        return int(value)
    if annotation.startswith("float"):
        return float(value)
    return value


def _load_csv(version: str, text: str, cls) -> list:
    lines = text.splitlines()
    if not lines or lines[0].strip() != f"# {version}":
        raise ValueError(f"expected a '# {version}' header line")
    types = {f.name: str(f.type) for f in fields(cls)}
    rows = []
    for row in csv.DictReader(lines[1:]):
        rows.append(cls(**{k: _coerce(v, types[k]) for k, v in row.items()}))
    return rows


def records_to_csv(records: Sequence[RunRecord]) -> str:
    return _dump_csv(RECORDS_VERSION, records, RunRecord)


def records_from_csv(text: str) -> list[RunRecord]:
    return _load_csv(RECORDS_VERSION, text, RunRecord)


def summary_to_csv(summaries: Sequence[Summary]) -> str:
    return _dump_csv(SUMMARY_VERSION, summaries, Summary)


def summary_from_csv(text: str) -> list[Summary]:
    return _load_csv(SUMMARY_VERSION, text, Summary)


def summary_svg(summaries: Sequence[Summary], width: int = 720, height: int = 360) -> str:
    """Clause-count bars on a linear axis with median-effort points on a log axis."""
    pad_l, pad_r, pad_t, pad_b = 60, 60, 20, 110
    plot_w, plot_h = width - pad_l - pad_r, height - pad_t - pad_b
    k = max(len(summaries), 1)
    slot = plot_w / k
    max_clauses = max((s.clauses for s in summaries), default=1) or 1
    medians = [s.median for s in summaries if s.median and s.median > 0 and s.median_text != "> timeout"]
    lo = math.floor(math.log10(min(medians))) if medians else 0
    hi = math.ceil(math.log10(max(medians))) if medians else 1
    if hi == lo:
        hi = lo + 1

    def y_log(v):
        return pad_t + plot_h * (1 - (math.log10(v) - lo) / (hi - lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">',
        f'<rect x="{pad_l}" y="{pad_t}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>',
    ]
    for e in range(lo, hi + 1):
        y = y_log(10.0 ** e)
        parts.append(f'<text x="{pad_l - 4}" y="{y:.1f}" text-anchor="end">1e{e}</text>')
    parts.append(f'<text x="{width - pad_r + 4}" y="{pad_t + 8}">{max_clauses} clauses</text>')
    for idx, s in enumerate(summaries):
        x0 = pad_l + idx * slot
        bar_h = plot_h * s.clauses / max_clauses
        parts.append(f'<rect x="{x0 + slot * 0.2:.1f}" y="{pad_t + plot_h - bar_h:.1f}" '
                     f'width="{slot * 0.6:.1f}" height="{bar_h:.1f}" fill="#cccccc"/>')
        cx = x0 + slot / 2
        if s.median and s.median > 0 and s.median_text != "> timeout":
            cy = y_log(s.median)
            if s.sn_log10:
                d = plot_h * s.sn_log10 / (hi - lo)
                parts.append(f'<line x1="{cx:.1f}" x2="{cx:.1f}" y1="{cy - d:.1f}" y2="{cy + d:.1f}" stroke="black"/>')
            parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="3" fill="black"/>')
        else:
            parts.append(f'<text x="{cx:.1f}" y="{pad_t + 10}" text-anchor="middle">&gt;</text>')
        label = f"{s.instance} {s.encoding}".replace("&", "&amp;").replace("<", "&lt;")
        parts.append(f'<text transform="translate({cx:.1f},{pad_t + plot_h + 6}) rotate(60)">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_reports(config: BenchConfig, records: Sequence[RunRecord]) -> list[Summary]:
    summaries = summarize(records, config.metric)
    if config.records_csv:
        Path(config.records_csv).write_text(records_to_csv(records))
    if config.summary_csv:
        Path(config.summary_csv).write_text(summary_to_csv(summaries))
    if config.svg:
        Path(config.svg).write_text(summary_svg(summaries))
    return summaries


def describe_command(config: BenchConfig) -> str:
    cmd = config.solver_command()
    return "embedded" if cmd is None else shlex.join(shlex.split(cmd.command))
