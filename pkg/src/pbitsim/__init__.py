"""p-bit Gibbs sampling over sparse higher-order binary energy models.

Hot sampling loops live in a compiled extension with a pure-Python fallback
selected at import time; see pbitsim.kernel.
"""

from .coloring import (
    ConflictGraph,
    GroupPlan,
    build_conflict_graph,
    chromatic_estimate,
    greedy_colour,
    group_count_sweep,
    plan_for,
)
from .kernel import backend_name
from .model import (
    Clamp,
    EnergyModel,
    eval_energy,
    exact_boltzmann,
    load_hubo,
    pbit_update,
    save_hubo,
    update_drive,
)
from .solve import (
    PtConfig,
    SaConfig,
    SolveResult,
    linear_schedule,
    metropolis_swap_prob,
    run_pt,
    run_sa,
)

__version__ = "0.1.0"

__all__ = [
    "Clamp",
    "ConflictGraph",
    "EnergyModel",
    "GroupPlan",
    "PtConfig",
    "SaConfig",
    "SolveResult",
    "backend_name",
    "build_conflict_graph",
    "chromatic_estimate",
    "eval_energy",
    "exact_boltzmann",
    "greedy_colour",
    "group_count_sweep",
    "linear_schedule",
    "load_hubo",
    "metropolis_swap_prob",
    "pbit_update",
    "plan_for",
    "run_pt",
    "run_sa",
    "save_hubo",
    "update_drive",
]
