"""Annealer noise monitoring testbed.

Builds problem QUBOs and co-embedded random indicator models, samples them
from a simulated annealer whose effective temperature drifts over time, and
runs the statistics and two-phase gating pipeline over the resulting
per-call mean-energy series.
"""

from .embedding import (
    ChainStrengthPolicy,
    Embedding,
    chimera_clique_embedding,
    embed_qubo,
    unembed,
    utc_chain_strength,
    validate_embedding,
)
from .kernels import kernel_backend
from .monitor import BurnInStore, GateDecision, StratifiedHistogram, stratify
from .problems import (
    GraphInstance,
    IndicatorSpec,
    PenaltyWeights,
    gen_er_graph,
    gen_indicator,
    mc_qubo,
    mvc_qubo,
)
from .qubo import (
    CombinedProgram,
    QuboModel,
    Sample,
    autoscale,
    combine_with_indicator,
    energy,
    qubo_ising_convert,
)
from .sampler import (
    AnnealCallConfig,
    NoiseProcessState,
    SampleBatch,
    advance_noise,
    create_backend,
    metropolis_sample,
    run_call,
)
from .topology import HardwareGraph, Region, apply_defects, chimera, idle_region

__version__ = "0.1.0"
