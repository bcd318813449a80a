"""cga-lab: instrumented compact genetic algorithm on unitation landscapes.

Submodules:
    fitness     -- OneMax and Cliff value tables and slope predicates
    engine      -- the cGA state machine, seeded streams, batched runs
    analytics   -- exact Poisson-binomial oracle, truncated-normal numerics,
                   drift prediction, tail bound
    experiments -- declarative, reproducible experiment protocols with CSV output
    cli         -- the ``cga-lab`` command-line front end
"""

from . import analytics, engine, experiments, fitness

__all__ = ["analytics", "engine", "experiments", "fitness"]
__version__ = "0.1.0"
