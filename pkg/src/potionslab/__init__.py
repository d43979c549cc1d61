"""potionslab: block-model networks, a cumulative-innovation agent game,
and spectral resampling diagnostics for discovery-time distributions."""

from .graph import Graph, read_edge_list, write_edge_list
from .sbm import (
    BlockMatrix, SbmParams, SbmFamily, ConnectivityExhausted, ConnectedSample,
    family_point, edge_probability_matrix, sample_er, sample_connected,
    sample_sbm, expected_edges_paper, expected_edges_exact, classify_structure,
    validate_prob_matrix,
)
from .recipes import Item, RecipeTable, default_recipe_table
from .abm import (
    AgentState, SimConfig, SimResult, init_population, select_partner,
    select_items, attempt_combination, diffuse, step, run_simulation,
)

__version__ = "0.1.0"

from .spectral import (  # noqa: E402  (circular-safe: spectral imports sbm only)
    AdjacencySpectralEmbedding, LaplacianSpectralEmbedding, Embedding,
    ResampleModel, ResampleDraw, ase, lse, select_dimension,
    rdpg_probabilities, density_adjust, resample,
)
from .stats import EmpiricalDistribution, emd_1d, summarize  # noqa: E402
from .experiments import (  # noqa: E402
    ExperimentConfig, ConfigError, RunResult, run_family_experiment,
    run_spectral_experiment, run_experiment, bootstrap_mean_diff,
)
