"""Command-line front end.

Verbs:
    run          -- execute one cGA run, print a summary, optionally trace CSV
    predict      -- print the drift prediction for a given (potential, variance, K)
    pb           -- print the exact offspring one-bit distribution
    variance-exp -- variance-stabilization sweep, CSV output
    runtime-exp  -- evaluations-to-optimum sweep on Cliff, CSV output
    drift-exp    -- drift snapshots on Cliff: predicted vs Monte-Carlo, CSV output

Exit codes: 0 = requested artifact fully produced, 1 = produced but incomplete
(e.g. drift snapshots never reached), 2 = invalid flags or config, 3 = I/O
failure.  Diagnostics go to stderr; data goes to stdout or the output files.

All randomness is seeded: without ``--seed``/``--base-seed`` the fixed
constant DEFAULT_SEED is used, so bare invocations are reproducible.  Pass
``--seed random`` to draw one from the OS (the chosen value is echoed to
stderr).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analytics, engine, experiments
from . import fitness as fit_mod

DEFAULT_SEED = 2718281828

TRACE_COLUMNS = ("t", "potential_before", "potential_after", "variance_before",
                 "variance_after", "ones_x", "ones_y", "event_class",
                 "delta_potential", "optimum_sampled")


def _fail(message: str, code: int) -> int:
    print(f"cga-lab: error: {message}", file=sys.stderr)
    return code


def _parse_seed(text: str) -> int:
    if text.strip().lower() == "random":
        seed = int(np.random.SeedSequence().entropy % (1 << 63))
        print(f"cga-lab: using random seed {seed}", file=sys.stderr)
        return seed
    return int(text, 0)


def _check_fitness_n(kind: str, n: int) -> str | None:
    if n < 2:
        return "n must be at least 2"
    if kind == fit_mod.CLIFF and n % 3 != 0:
        return "n must be divisible by 3"
    return None


def cmd_run(args) -> int:
    problem = _check_fitness_n(args.fitness, args.n)
    if problem:
        return _fail(problem, 2)
    try:
        k = experiments.resolve_k(args.k, args.n)
        seed = _parse_seed(args.seed)
    except ValueError as exc:
        return _fail(str(exc), 2)
    if k <= 0:
        return _fail("K must be positive", 2)
    if args.max_evals < 2:
        return _fail("--max-evals must be at least 2", 2)
    f = fit_mod.make(args.fitness, args.n)
    model = engine.init_model(args.n, k)
    rng = engine.run_stream(seed)
    if args.trace is None:
        result = engine.run(model, f, rng, args.max_evals, seed_tag=seed)
    else:
        result = _run_with_trace(model, f, rng, args, seed)
        if result is None:
            return 3
    print(f"evaluations={result.evaluations} censored={int(result.censored)} "
          f"iterations={result.iterations} final_potential={result.final_potential!r} "
          f"final_variance={result.final_variance!r} seed={result.seed}")
    return 0


def _run_with_trace(model, f, rng, args, seed) -> engine.RunResult | None:
    rows = []
    max_iters = args.max_evals // 2
    outcome = None
    for t in range(max_iters):
        rec = engine.step(model, f, rng)
        if t % args.record_every == 0:
            rows.append((t, repr(rec.potential_before), repr(rec.potential_after),
                         repr(rec.variance_before), repr(rec.variance_after),
                         rec.ones_x, rec.ones_y, rec.event_class,
                         repr(rec.delta_potential), int(rec.optimum_sampled)))
        if rec.optimum_sampled:
            evals = 2 * t + 1 if rec.optimum_on_first else 2 * t + 2
            pot, var = rec.potential_after, rec.variance_after
            outcome = engine.RunResult(evals, False, t + 1, seed, pot, var)
            break
    if outcome is None:
        p = model.freqs
        outcome = engine.RunResult(2 * max_iters, True, max_iters, seed,
                                   float(p.sum()), float((p * (1 - p)).sum()))
    try:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# cga-lab v1, kind=trace, base_seed={seed}, log_base=e\n")
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    except OSError as exc:
        _fail(f"cannot write trace: {exc}", 3)
        return None
    return outcome


def cmd_predict(args) -> int:
    if args.variance <= 0:
        return _fail("variance must be positive", 2)
    if args.k <= 0:
        return _fail("K must be positive", 2)
    if args.n < 2:
        return _fail("n must be at least 2", 2)
    threshold = 2.0 * args.n / 3.0
    pred = analytics.drift_prediction_from_moments(args.potential, args.variance,
                                                   args.k, threshold)
    print(f"threshold={threshold!r}")
    print(f"p_right={pred.p_right!r}")
    print(f"prob_L={pred.prob_L!r}")
    print(f"prob_R={pred.prob_R!r}")
    print(f"prob_M={pred.prob_M!r}")
    print(f"drift_M={pred.drift_M!r}")
    print(f"drift_same_slope={pred.drift_same_slope!r}")
    print(f"drift_total={pred.drift_total!r}")
    print(f"correction_bound={pred.correction_bound!r}")
    return 0


def cmd_pb(args) -> int:
    if args.freqs is not None:
        try:
            with open(args.freqs, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            return _fail(str(exc), 3)
        try:
            freqs = [float(tok) for tok in text.replace(",", " ").split()]
        except ValueError as exc:
            return _fail(f"bad frequency value: {exc}", 2)
    else:
        if args.n is None or args.uniform is None:
            return _fail("either --freqs or both --n and --uniform are required", 2)
        freqs = [args.uniform] * args.n
    if not freqs:
        return _fail("no frequencies given", 2)
    if any(not 0.0 <= p <= 1.0 for p in freqs):
        return _fail("frequencies must lie in [0, 1]", 2)
    try:
        pb = analytics.pb_distribution(freqs)
    except ValueError as exc:
        return _fail(str(exc), 2)
    print(" ".join(repr(float(p)) for p in pb.probs))
    print(f"mean={pb.mean()!r}")
    print(f"variance={pb.variance()!r}")
    return 0


def _experiment_config(kind: str, args) -> experiments.ExperimentConfig:
    overrides = {
        "fitness": args.fitness,
        "n_values": [int(v) for v in args.n.split(",")] if args.n else None,
        "k_spec": [v.strip() for v in args.k.split(",")] if args.k else None,
        "runs": args.runs,
        "base_seed": _parse_seed(args.base_seed) if args.base_seed else None,
        "budget": args.budget,
        "output_path": args.output,
        "drift_samples": args.samples,
        "drift_epsilon": args.epsilon,
        "jobs": args.jobs,
    }
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            fields = experiments.parse_config_text(fh.read())
        if fields.get("kind", kind) != kind:
            raise ValueError(f"config kind {fields['kind']!r} does not match "
                             f"the {kind!r} verb")
    else:
        fields = {}
    fields["kind"] = kind
    fields.update({k: v for k, v in overrides.items() if v is not None})
    fields.setdefault("base_seed", DEFAULT_SEED)
    return experiments.config_from_fields(fields)


def cmd_experiment(kind: str, args) -> int:
    try:
        cfg = _experiment_config(kind, args)
        cfg.validate()
    except (ValueError, TypeError) as exc:
        return _fail(str(exc), 2)
    except OSError as exc:
        return _fail(str(exc), 3)
    try:
        outcome = experiments.run_experiment(cfg)
    except OSError as exc:
        return _fail(str(exc), 3)
    print(f"wrote {outcome.rows} rows to {outcome.output_path}", file=sys.stderr)
    return 0 if outcome.complete else 1


def _add_experiment_parser(sub, verb: str, kind: str, help_text: str):
    p = sub.add_parser(verb, help=help_text)
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--n", help="comma-separated list of n values")
    p.add_argument("--k", help="comma-separated K entries (literal, 'log n', 'n^0.45', "
                               "'sqrt n', 'n', '2^j', or '2^a..2^b')")
    p.add_argument("--runs", type=int)
    p.add_argument("--budget", type=int,
                   help="max evaluations per run (runtime) or iteration horizon")
    p.add_argument("--base-seed", help="integer, or 'random'")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--fitness", choices=[fit_mod.ONEMAX, fit_mod.CLIFF])
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--samples", type=int, help="one-step samples per drift snapshot")
    p.add_argument("--epsilon", type=float,
                   help="drift window exponent: width V^(1/2-epsilon)")
    p.set_defaults(handler=lambda args: cmd_experiment(kind, args))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cga-lab",
        description="Compact genetic algorithm on unitation landscapes: runs, "
                    "analytics and reproducible experiments.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="execute one seeded cGA run")
    p_run.add_argument("--n", type=int, required=True)
    p_run.add_argument("--k", required=True,
                       help="update strength: literal or formula such as 'n^0.45'")
    p_run.add_argument("--fitness", choices=[fit_mod.ONEMAX, fit_mod.CLIFF],
                       default=fit_mod.CLIFF)
    p_run.add_argument("--seed", default=str(DEFAULT_SEED), help="integer, or 'random'")
    p_run.add_argument("--max-evals", type=int, default=10_000_000)
    p_run.add_argument("--trace", help="write a per-iteration trace CSV here")
    p_run.add_argument("--record-every", type=int, default=1)
    p_run.set_defaults(handler=cmd_run)

    p_pred = sub.add_parser("predict", help="drift prediction from (potential, variance, K)")
    p_pred.add_argument("--n", type=int, required=True)
    p_pred.add_argument("--k", type=float, required=True)
    p_pred.add_argument("--potential", type=float, required=True)
    p_pred.add_argument("--variance", type=float, required=True)
    p_pred.set_defaults(handler=cmd_predict)

    p_pb = sub.add_parser("pb", help="exact one-bit-count distribution")
    p_pb.add_argument("--freqs", help="file of frequencies (whitespace or comma separated)")
    p_pb.add_argument("--n", type=int)
    p_pb.add_argument("--uniform", type=float, help="use n copies of this frequency")
    p_pb.set_defaults(handler=cmd_pb)

    _add_experiment_parser(sub, "variance-exp", "variance",
                           "sampling variance after the stabilization horizon")
    _add_experiment_parser(sub, "runtime-exp", "runtime",
                           "evaluations until the Cliff optimum is sampled")
    _add_experiment_parser(sub, "drift-exp", "drift",
                           "drift snapshots near the cliff: predicted vs empirical")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
