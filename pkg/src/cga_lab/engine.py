"""Compact genetic algorithm engine.

The cGA keeps one marginal frequency per bit.  Every iteration it samples two
offspring x and y from the product distribution, ranks them by fitness (on a
tie the first-sampled offspring keeps its role), and moves each frequency by
1/K toward the bit value of the winner wherever the two offspring disagree.
Frequencies are clamped to the borders [1/n, 1 - 1/n].

Randomness discipline: a single iteration always consumes exactly 2n uniform
doubles from its stream (n for x, then n for y), so a run is a pure function
of its seed.  ``run_stream`` derives independent per-run streams from
(base_seed, key...) and ``run_batch`` advances many runs in lockstep while
drawing from each run's own stream, which makes batched, parallel and
sequential execution produce bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import fitness as fit_mod

EVENT_LEFT = "L"
EVENT_RIGHT = "R"
EVENT_MIXED = "M"


def run_stream(base_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one run, mixed from (base_seed, key...)."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def stream_fingerprint(base_seed: int, *key: int) -> int:
    """Stable 64-bit identifier of the stream ``run_stream`` would return."""
    ss = np.random.SeedSequence(entropy=int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class FrequencyModel:
    """Probabilistic state of the cGA: n marginal frequencies and strength K.

    Invariant: every frequency stays inside [1/n, 1 - 1/n] ("the borders");
    a fresh model starts with every frequency at 1/2.
    """

    n: int
    k: float
    freqs: np.ndarray = field(repr=False)

    @property
    def lower_border(self) -> float:
        return 1.0 / self.n

    @property
    def upper_border(self) -> float:
        return 1.0 - 1.0 / self.n

    def copy(self) -> "FrequencyModel":
        return FrequencyModel(self.n, self.k, self.freqs.copy())


@dataclass(frozen=True)
class Bitstring:
    """A sampled offspring with its one-bit count cached."""

    bits: np.ndarray
    ones: int

    def __post_init__(self):
        if self.ones != int(np.sum(self.bits)):
            raise ValueError("cached one-bit count does not match bits")


@dataclass(frozen=True)
class StepRecord:
    """Trace of one iteration, taken after the conditional fitness swap.

    ``ones_x`` always belongs to the reinforced offspring.  ``event_class``
    classifies the pair against the slope boundary 2n/3: L if neither
    offspring exceeds it, R if both do, M if exactly one does.
    """

    t: int
    potential_before: float
    potential_after: float
    variance_before: float
    variance_after: float
    ones_x: int
    ones_y: int
    event_class: str
    delta_potential: float
    optimum_sampled: bool
    evaluations_used: int = 2
    optimum_on_first: bool | None = None


@dataclass(frozen=True)
class RunResult:
    """Outcome of one run: evaluations spent until the optimum was sampled.

    The first offspring of iteration t is evaluation 2t+1 and the second is
    2t+2, so ``evaluations`` is odd when the first offspring of its iteration
    hit the optimum.  ``censored`` means the budget ran out first, in which
    case ``evaluations`` equals the budget.
    """

    evaluations: int
    censored: bool
    iterations: int
    seed: int
    final_potential: float
    final_variance: float


def init_model(n: int, k: float) -> FrequencyModel:
    """Fresh cGA state: all n frequencies at 1/2."""
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError("n must be an integer >= 2")
    if not k > 0:
        raise ValueError("K must be positive")
    return FrequencyModel(int(n), float(k), np.full(int(n), 0.5))


def sample(model: FrequencyModel, rng: np.random.Generator) -> Bitstring:
    """Draw one offspring: bit i is 1 with probability freqs[i]."""
    bits = (rng.random(model.n) < model.freqs).astype(np.uint8)
    return Bitstring(bits, int(bits.sum()))


def _classify_event(ones_a: int, ones_b: int, n: int) -> str:
    # "exceeds 2n/3" decided in exact integer arithmetic: 3*ones > 2*n.
    a_right = 3 * ones_a > 2 * n
    b_right = 3 * ones_b > 2 * n
    if a_right and b_right:
        return EVENT_RIGHT
    if a_right or b_right:
        return EVENT_MIXED
    return EVENT_LEFT


def _iterate(model: FrequencyModel, f: fit_mod.UnitationFunction,
             rng: np.random.Generator) -> tuple[int, int, bool]:
    """One full iteration; mutates the model.

    Returns (ones of x as sampled, ones of y as sampled, swapped?).  Consumes
    exactly 2n uniforms: n for x, then n for y.
    """
    p = model.freqs
    x = rng.random(model.n) < p
    y = rng.random(model.n) < p
    ones_x = int(x.sum())
    ones_y = int(y.sum())
    swapped = f.values[ones_x] < f.values[ones_y]
    delta = np.subtract(y, x, dtype=np.int8) if swapped else np.subtract(x, y, dtype=np.int8)
    moved = p + delta * (1.0 / model.k)
    np.clip(moved, model.lower_border, model.upper_border, out=moved)
    model.freqs = moved
    return ones_x, ones_y, bool(swapped)


def step(model: FrequencyModel, f: fit_mod.UnitationFunction,
         rng: np.random.Generator) -> StepRecord:
    """Execute one iteration and return its trace record.

    Moments are recomputed from the frequency vector on both sides of the
    update, so ``potential_after`` never drifts away from sum(freqs).
    """
    p = model.freqs
    pot_before = float(p.sum())
    var_before = float((p * (1.0 - p)).sum())
    ones_x_raw, ones_y_raw, swapped = _iterate(model, f, rng)
    q = model.freqs
    pot_after = float(q.sum())
    var_after = float((q * (1.0 - q)).sum())
    ones_x, ones_y = (ones_y_raw, ones_x_raw) if swapped else (ones_x_raw, ones_y_raw)
    opt_first = ones_x_raw == f.n
    opt_any = opt_first or ones_y_raw == f.n
    return StepRecord(
        t=0,
        potential_before=pot_before,
        potential_after=pot_after,
        variance_before=var_before,
        variance_after=var_after,
        ones_x=ones_x,
        ones_y=ones_y,
        event_class=_classify_event(ones_x, ones_y, model.n),
        delta_potential=pot_after - pot_before,
        optimum_sampled=opt_any,
        optimum_on_first=opt_first if opt_any else None,
    )


def _final_moments(model: FrequencyModel) -> tuple[float, float]:
    p = model.freqs
    return float(p.sum()), float((p * (1.0 - p)).sum())


def run(model: FrequencyModel, f: fit_mod.UnitationFunction, rng: np.random.Generator,
        max_evaluations: int, *, seed_tag: int = 0) -> RunResult:
    """Run until an offspring is the global optimum or the budget is spent.

    Every iteration evaluates both offspring (2 evaluations) except that an
    odd budget permits one final x-only evaluation.  The optimum is detected
    at sampling time, before the fitness swap, so counts can be odd.
    """
    if max_evaluations < 2:
        raise ValueError("max_evaluations must be at least 2")
    n = model.n
    full_iters = max_evaluations // 2
    for t in range(full_iters):
        ones_x_raw, ones_y_raw, _ = _iterate(model, f, rng)
        if ones_x_raw == n or ones_y_raw == n:
            evals = 2 * t + 1 if ones_x_raw == n else 2 * t + 2
            pot, var = _final_moments(model)
            return RunResult(evals, False, t + 1, seed_tag, pot, var)
    iterations = full_iters
    if max_evaluations % 2 == 1:
        # Budget leaves room to sample (and possibly recognize) one more x.
        iterations += 1
        x = rng.random(n) < model.freqs
        if int(x.sum()) == n:
            pot, var = _final_moments(model)
            return RunResult(max_evaluations, False, iterations, seed_tag, pot, var)
    pot, var = _final_moments(model)
    return RunResult(max_evaluations, True, iterations, seed_tag, pot, var)


def trace_run(model: FrequencyModel, f: fit_mod.UnitationFunction, rng: np.random.Generator,
              max_iterations: int, record_every: int = 1) -> list[StepRecord]:
    """Like ``run`` but bounded in iterations, keeping every record_every-th record."""
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    records: list[StepRecord] = []
    for t in range(max_iterations):
        rec = step(model, f, rng)
        if t % record_every == 0:
            records.append(replace(rec, t=t))
        if rec.optimum_sampled:
            break
    return records


def one_step_ensemble(freqs: np.ndarray, k: float, f: fit_mod.UnitationFunction,
                      uniforms: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized one-iteration outcomes from a frozen frequency vector.

    ``uniforms`` has shape (samples, 2n); row s holds the  2n draws of one
    hypothetical iteration.  Returns (delta_potential, ones_x, ones_y) per
    sample, with ones counts in sampling order (no swap applied; the potential
    change already accounts for the swap and for border clamping).
    """
    n = freqs.shape[0]
    lo, hi = 1.0 / n, 1.0 - 1.0 / n
    x = uniforms[:, :n] < freqs
    y = uniforms[:, n:] < freqs
    ones_x = x.sum(axis=1)
    ones_y = y.sum(axis=1)
    swapped = f.values[ones_x] < f.values[ones_y]
    delta = np.subtract(x, y, dtype=np.int8)
    delta[swapped] *= -1
    moved = freqs + delta * (1.0 / k)
    np.clip(moved, lo, hi, out=moved)
    return (moved - freqs).sum(axis=1), ones_x, ones_y


@dataclass(frozen=True)
class BatchSpec:
    """One run inside a lockstep batch (shared n, per-run K and stream key)."""

    k: float
    stream_key: tuple[int, ...]
    seed_tag: int
    max_evaluations: int | None = None
    max_iterations: int | None = None


def run_batch(n: int, f: fit_mod.UnitationFunction, base_seed: int, specs: list[BatchSpec],
              *, stop_at_optimum: bool = True) -> list[RunResult]:
    """Advance many independent runs in lockstep.

    Each run draws from its own derived stream in the same order as a
    sequential ``run`` would, so results equal per-run sequential execution;
    batching only amortizes per-iteration overhead.  Uniform draws are
    pre-generated in blocks per run; a finished run simply stops consuming
    its stream, which cannot affect any other run.
    """
    n_runs = len(specs)
    results: list[RunResult | None] = [None] * n_runs
    if n_runs == 0:
        return []
    for s in specs:
        if s.max_evaluations is None and s.max_iterations is None:
            raise ValueError("each batch spec needs an evaluation or iteration bound")
        if s.max_evaluations is not None and s.max_evaluations < 2:
            raise ValueError("max_evaluations must be at least 2")

    freqs = np.full((n_runs, n), 0.5)
    inv_k = np.array([1.0 / s.k for s in specs])
    gens = [run_stream(base_seed, *s.stream_key) for s in specs]
    # Iteration ceiling per run; an odd evaluation budget buys half an iteration.
    iter_cap = np.array([
        s.max_iterations if s.max_iterations is not None
        else (s.max_evaluations + 1) // 2
        for s in specs], dtype=np.int64)
    eval_cap = np.array([
        s.max_evaluations if s.max_evaluations is not None else np.iinfo(np.int64).max
        for s in specs], dtype=np.int64)
    active = np.arange(n_runs)
    lo, hi = 1.0 / n, 1.0 - 1.0 / n
    values = f.values
    t = 0
    block = max(16, min(1024, 4_000_000 // (max(1, n_runs) * 2 * n)))

    def finish(idx: int, evals: int, censored: bool, iters: int):
        pot = float(freqs[idx].sum())
        var = float((freqs[idx] * (1.0 - freqs[idx])).sum())
        results[idx] = RunResult(evals, censored, iters, specs[idx].seed_tag, pot, var)

    while active.size:
        buf = np.stack([gens[i].random((block, 2 * n)) for i in active])
        for j in range(block):
            u = buf[:, j, :]
            p = freqs[active]
            x = u[:, :n] < p
            y = u[:, n:] < p
            ones_x = x.sum(axis=1)
            ones_y = y.sum(axis=1)
            # Runs whose budget only covers the first offspring of this iteration.
            half = 2 * t + 2 > eval_cap[active]
            swapped = values[ones_x] < values[ones_y]
            delta = np.subtract(x, y, dtype=np.int8)
            delta[swapped] *= -1
            moved = p + delta * inv_k[active, None]
            np.clip(moved, lo, hi, out=moved)
            upd = ~half
            freqs[active[upd]] = moved[upd]

            done = np.zeros(active.size, dtype=bool)
            if stop_at_optimum:
                hit_x = ones_x == n
                hit_y = (ones_y == n) & ~half
                for pos in np.flatnonzero(hit_x | hit_y):
                    idx = active[pos]
                    evals = 2 * t + 1 if hit_x[pos] else 2 * t + 2
                    finish(idx, evals, False, t + 1)
                done = hit_x | hit_y
            exhausted = ~done & (t + 1 >= iter_cap[active])
            for pos in np.flatnonzero(exhausted):
                idx = active[pos]
                if specs[idx].max_evaluations is not None:
                    finish(idx, specs[idx].max_evaluations, True, t + 1)
                else:
                    finish(idx, 2 * (t + 1), True, t + 1)
            done |= exhausted
            if done.any():
                keep = ~done
                active = active[keep]
                buf = buf[keep]
            t += 1
            if not active.size:
                break
    return [r for r in results if r is not None]
