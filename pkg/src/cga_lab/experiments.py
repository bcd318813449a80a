"""Declarative, seeded experiment protocols with CSV persistence.

Three experiment kinds are supported:

* ``variance``: run the cGA for ceil(100*sqrt(n)*K + 100*K^2) iterations with
  no optimum stopping and record the final sampling variance, raw and divided
  by sqrt(K).
* ``runtime``: run Cliff to the optimum (or an evaluation budget) and record
  the number of evaluations; a companion ``.meta`` file lists the reference
  values (3/2)^n, 2^n and n^(n/3) per n.
* ``drift``: run Cliff until the potential first enters the window
  [2n/3 - V^(1/2-eps), 2n/3], freeze that state as a snapshot, and compare the
  predicted one-step drift against a Monte-Carlo estimate and the exact
  distribution.

Every row is reproducible from (base_seed, row keys): each run draws from its
own stream derived with ``engine.run_stream``, so parallel, sequential and
batched execution all write byte-identical files.
"""

from __future__ import annotations

import math
import multiprocessing
import sys
from dataclasses import dataclass, field

from . import analytics, engine
from . import fitness as fit_mod

KINDS = ("variance", "runtime", "drift")

CSV_COLUMNS = {
    "variance": ("n", "k_label", "k_value", "run", "iterations_executed",
                 "variance_final", "variance_over_sqrtK", "potential_final"),
    "runtime": ("n", "k_exponent", "k_value", "run", "evaluations", "censored", "seed"),
    "drift": ("n", "k_value", "snapshot_id", "potential", "variance", "p_right_exact",
              "drift_empirical", "drift_stderr", "drift_predicted", "prob_M_empirical"),
}

DEFAULT_BUDGETS = {"variance": 10_000_000, "runtime": 100_000_000, "drift": 200_000}


def resolve_k(formula: str, n: int) -> float:
    """Resolve a K entry at a given n.

    Accepted forms: a real literal ("128", "1e3"), "log n" (natural log),
    "sqrt n", "n", a real power "n^0.45", or a power of two "2^7".
    """
    s = " ".join(str(formula).split()).lower()
    if s == "log n":
        return math.log(n)
    if s == "sqrt n":
        return math.sqrt(n)
    if s == "n":
        return float(n)
    try:
        if s.startswith("n^"):
            return float(n) ** float(s[2:])
        if s.startswith("2^"):
            return 2.0 ** int(s[2:])
        return float(s)
    except ValueError:
        raise ValueError(f"unknown K formula {formula!r}") from None


def expand_k_spec(entries) -> list[str]:
    """Normalize K entries, expanding '2^a..2^b' ranges."""
    out: list[str] = []
    for raw in entries:
        s = " ".join(str(raw).split())
        low = s.lower()
        if low.startswith("2^") and ".." in low:
            lo_part, hi_part = low.split("..", 1)
            lo = int(lo_part[2:])
            hi = int(hi_part[2:] if hi_part.startswith("2^") else hi_part)
            if hi < lo:
                raise ValueError(f"empty K range {s!r}")
            out.extend(f"2^{j}" for j in range(lo, hi + 1))
        else:
            out.append(s)
    return out


@dataclass(frozen=True)
class ResolvedK:
    """A K grid entry evaluated at one n."""

    label: str
    value: float
    exponent: float  # exact j for 2^j entries, log2(value) otherwise


def resolve_k_entry(formula: str, n: int) -> ResolvedK:
    value = resolve_k(formula, n)
    s = " ".join(str(formula).split()).lower()
    exponent = float(int(s[2:])) if s.startswith("2^") and ".." not in s else math.log2(value)
    return ResolvedK(s, value, exponent)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment byte-for-byte."""

    kind: str
    fitness: str
    n_values: list[int]
    k_spec: list[str]
    runs: int
    base_seed: int
    budget: int | None = None  # max evaluations (runtime) / iteration horizon (variance, drift)
    output_path: str = "experiment.csv"
    drift_samples: int = 100_000
    drift_epsilon: float = 0.0
    jobs: int = 1

    def resolved_budget(self) -> int:
        return self.budget if self.budget is not None else DEFAULT_BUDGETS[self.kind]

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.fitness not in (fit_mod.ONEMAX, fit_mod.CLIFF):
            raise ValueError(f"unknown fitness {self.fitness!r}")
        if self.kind in ("runtime", "drift") and self.fitness != fit_mod.CLIFF:
            raise ValueError(f"{self.kind} experiments require the cliff fitness")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.n_values:
            raise ValueError("at least one n is required")
        for n in self.n_values:
            if n < 2:
                raise ValueError("n must be at least 2")
            if self.fitness == fit_mod.CLIFF and n % 3 != 0:
                raise ValueError(f"n={n}: n must be divisible by 3 for cliff")
            if self.kind == "drift" and n > analytics.PB_MAX_N:
                raise ValueError(f"n={n} exceeds the exact-distribution guard "
                                 f"({analytics.PB_MAX_N}) used by drift snapshots")
        if not self.k_spec:
            raise ValueError("at least one K entry is required")
        for n in self.n_values:
            for entry in expand_k_spec(self.k_spec):
                if not resolve_k(entry, n) > 0:
                    raise ValueError(f"K entry {entry!r} resolves to a nonpositive value at n={n}")
        budget = self.resolved_budget()
        if self.kind == "runtime" and budget < 2:
            raise ValueError("runtime budget must allow at least 2 evaluations")
        if self.kind in ("variance", "drift") and budget < 1:
            raise ValueError("iteration horizon must be positive")
        if self.drift_samples < 1:
            raise ValueError("drift_samples must be at least 1")
        if not 0.0 <= self.drift_epsilon < 0.5:
            raise ValueError("drift epsilon must lie in [0, 0.5)")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


def variance_horizon(n: int, k: float) -> int:
    """ceil(100*sqrt(n)*K + 100*K^2) iterations."""
    return math.ceil(100.0 * math.sqrt(n) * k + 100.0 * k * k)


@dataclass(frozen=True)
class _Group:
    """One (n, K entry) cell of the grid; the unit of parallel work."""

    cfg_kind: str
    fitness: str
    n: int
    k_slot: int
    k: ResolvedK
    runs: int
    base_seed: int
    budget: int
    drift_samples: int = 0
    drift_epsilon: float = 0.0


def _expand_groups(cfg: ExperimentConfig) -> list[_Group]:
    groups = []
    entries = expand_k_spec(cfg.k_spec)
    for n in sorted(cfg.n_values):
        for slot, entry in enumerate(entries):
            groups.append(_Group(cfg.kind, cfg.fitness, n, slot, resolve_k_entry(entry, n),
                                 cfg.runs, cfg.base_seed, cfg.resolved_budget(),
                                 cfg.drift_samples, cfg.drift_epsilon))
    return groups


def _variance_group(g: _Group) -> list[tuple]:
    f = fit_mod.make(g.fitness, g.n)
    horizon = min(variance_horizon(g.n, g.k.value), g.budget)
    specs = [engine.BatchSpec(k=g.k.value, stream_key=(g.n, g.k_slot, run),
                              seed_tag=engine.stream_fingerprint(g.base_seed, g.n, g.k_slot, run),
                              max_iterations=horizon)
             for run in range(g.runs)]
    results = engine.run_batch(g.n, f, g.base_seed, specs, stop_at_optimum=False)
    rows = []
    for run, res in enumerate(results):
        rows.append((g.n, g.k.label, g.k.value, run, res.iterations, res.final_variance,
                     res.final_variance / math.sqrt(g.k.value), res.final_potential))
    return rows


def _runtime_group(g: _Group) -> list[tuple]:
    f = fit_mod.make(g.fitness, g.n)
    specs = [engine.BatchSpec(k=g.k.value, stream_key=(g.n, g.k_slot, run),
                              seed_tag=engine.stream_fingerprint(g.base_seed, g.n, g.k_slot, run),
                              max_evaluations=g.budget)
             for run in range(g.runs)]
    results = engine.run_batch(g.n, f, g.base_seed, specs, stop_at_optimum=True)
    rows = []
    for run, res in enumerate(results):
        rows.append((g.n, g.k.exponent, g.k.value, run, res.evaluations,
                     int(res.censored), res.seed))
    return rows


def _drift_group(g: _Group) -> tuple[list[tuple], list[str]]:
    f = fit_mod.make(g.fitness, g.n)
    threshold = 2 * g.n // 3
    rows: list[tuple] = []
    missed: list[str] = []
    for snap in range(g.runs):
        model = engine.init_model(g.n, g.k.value)
        rng = engine.run_stream(g.base_seed, g.n, g.k_slot, snap, 0)
        snapshot = None
        hit_optimum = False
        for _ in range(g.budget):
            rec = engine.step(model, f, rng)
            if rec.optimum_sampled:
                hit_optimum = True
                break
            width = rec.variance_after ** (0.5 - g.drift_epsilon)
            if threshold - width <= rec.potential_after <= threshold:
                snapshot = model.copy()
                break
        if snapshot is None:
            why = ("the optimum was sampled first" if hit_optimum
                   else f"the potential never entered the drift window within "
                        f"{g.budget} iterations")
            missed.append(f"n={g.n} K={g.k.label} snapshot={snap}: {why}")
            continue
        pot = analytics.potential(snapshot)
        var = analytics.sampling_variance(snapshot)
        pb = analytics.pb_distribution(snapshot.freqs)
        p_r = analytics.p_right(pb, threshold)
        pred = analytics.predicted_drift(snapshot, threshold)
        mc_rng = engine.run_stream(g.base_seed, g.n, g.k_slot, snap, 1)
        est = analytics.empirical_drift(snapshot, f, threshold, g.drift_samples, mc_rng)
        rows.append((g.n, g.k.value, snap, pot, var, p_r, est.mean, est.stderr,
                     pred.drift_total, est.event_prob(engine.EVENT_MIXED)))
    return rows, missed


def _run_group(g: _Group):
    if g.cfg_kind == "variance":
        return _variance_group(g), []
    if g.cfg_kind == "runtime":
        return _runtime_group(g), []
    return _drift_group(g)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str, kind: str, base_seed: int, rows: list[tuple]) -> None:
    """Write the two-line header and the sorted data rows."""
    columns = CSV_COLUMNS[kind]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# cga-lab v1, kind={kind}, base_seed={base_seed}, log_base=e\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_runtime_reference(path: str, base_seed: int, n_values: list[int]) -> None:
    """Companion metadata: the three reference curves evaluated at each n."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# cga-lab v1, kind=runtime-reference, base_seed={base_seed}, log_base=e\n")
        fh.write("n,three_halves_pow_n,two_pow_n,n_pow_n_over_3\n")
        for n in sorted(n_values):
            fh.write(f"{n},{1.5 ** n!r},{2 ** n},{float(n) ** (n / 3.0)!r}\n")


@dataclass
class ExperimentOutcome:
    output_path: str
    rows: int
    warnings: list[str] = field(default_factory=list)
    extra_files: list[str] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.warnings


def run_experiment(cfg: ExperimentConfig, progress=None) -> ExperimentOutcome:
    """Execute a validated config, write its CSV, and report completeness.

    ``jobs > 1`` fans the (n, K) groups out over worker processes; rows are
    keyed and sorted afterwards, so worker scheduling cannot change the file.
    """
    cfg.validate()
    groups = _expand_groups(cfg)
    stream = progress if progress is not None else sys.stderr
    rows: list[tuple] = []
    warnings: list[str] = []
    if cfg.jobs > 1 and len(groups) > 1:
        with multiprocessing.get_context("fork").Pool(processes=cfg.jobs) as pool:
            outcomes = pool.map(_run_group, groups)
    else:
        outcomes = []
        for i, g in enumerate(groups):
            outcomes.append(_run_group(g))
            print(f"[cga-lab] {cfg.kind}: n={g.n} K={g.k.label} finished "
                  f"({i + 1}/{len(groups)})", file=stream)
    for group_rows, group_warnings in outcomes:
        rows.extend(group_rows)
        warnings.extend(group_warnings)
    if cfg.kind == "drift":
        rows.sort(key=lambda r: (r[0], r[1], r[2]))  # (n, k_value, snapshot_id)
    else:
        rows.sort(key=lambda r: (r[0], r[2], r[3]))  # (n, k_value, run)
    write_csv(cfg.output_path, cfg.kind, cfg.base_seed, rows)
    extra = []
    if cfg.kind == "runtime":
        meta_path = cfg.output_path + ".meta"
        write_runtime_reference(meta_path, cfg.base_seed, cfg.n_values)
        extra.append(meta_path)
    for w in warnings:
        print(f"[cga-lab] warning: {w}", file=stream)
    return ExperimentOutcome(cfg.output_path, len(rows), warnings, extra)


# --- plain key/value config files -------------------------------------------

_CONFIG_KEYS = {
    "kind": "kind",
    "fitness": "fitness",
    "n": "n_values",
    "n_values": "n_values",
    "k": "k_spec",
    "k_spec": "k_spec",
    "runs": "runs",
    "base_seed": "base_seed",
    "seed": "base_seed",
    "budget": "budget",
    "output": "output_path",
    "output_path": "output_path",
    "samples": "drift_samples",
    "drift_samples": "drift_samples",
    "epsilon": "drift_epsilon",
    "drift_epsilon": "drift_epsilon",
    "jobs": "jobs",
}


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines into ExperimentConfig field values."""
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        field_name = _CONFIG_KEYS.get(key.lower())
        if field_name is None:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        if field_name == "n_values":
            fields[field_name] = [int(v) for v in value.split(",") if v.strip()]
        elif field_name == "k_spec":
            fields[field_name] = [v.strip() for v in value.split(",") if v.strip()]
        elif field_name in ("runs", "base_seed", "budget", "drift_samples", "jobs"):
            fields[field_name] = int(value)
        elif field_name == "drift_epsilon":
            fields[field_name] = float(value)
        elif field_name == "fitness":
            fields[field_name] = value.lower()
        else:
            fields[field_name] = value
    return fields


def load_config(path: str, **overrides) -> ExperimentConfig:
    """Build a config from a file plus keyword overrides (flags win)."""
    with open(path, "r", encoding="utf-8") as fh:
        fields = parse_config_text(fh.read())
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_fields(fields)


def config_from_fields(fields: dict) -> ExperimentConfig:
    missing = [k for k in ("kind", "fitness", "n_values", "k_spec", "runs", "base_seed")
               if k not in fields]
    if missing:
        raise ValueError(f"missing config keys: {', '.join(missing)}")
    return ExperimentConfig(**fields)
