"""ABC inference for hidden networked populations sampled by link-tracing.

Subpackages cover the full workflow: prior specification and population
generation (`priors`, `netgen`), the link-tracing sampler (`linktrace`),
summary statistics and screening regressions (`sumstats`), the
prior-weighted conditional kernel density (`kde`), the citation-network
growth model (`citesim`), and orchestration plus the CLI (`pipeline`,
`cli`).
"""

from abcnet.priors import PriorSpec, ParameterSet
from abcnet.netgen import PopulationParams, PopulationGraph, generate_population
from abcnet.linktrace import SampleRecord, link_trace_sample, node_depth
from abcnet.sumstats import compute_stats, cubic_screen
from abcnet.kde import SimTable, ConditionalKernelDensity
from abcnet.pipeline import RunConfig, run_round, screen_and_update, infer

__all__ = [
    "PriorSpec",
    "ParameterSet",
    "PopulationParams",
    "PopulationGraph",
    "generate_population",
    "SampleRecord",
    "link_trace_sample",
    "node_depth",
    "compute_stats",
    "cubic_screen",
    "SimTable",
    "ConditionalKernelDensity",
    "RunConfig",
    "run_round",
    "screen_and_update",
    "infer",
]

__version__ = "0.1.0"
