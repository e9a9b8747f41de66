"""p-modulus of walk families on weighted directed or undirected graphs.

The modulus generalizes shortest path length (p = inf), effective
conductance (p = 2), and max-flow/min-cut (p = 1).  This package computes it
by constraint generation over walk oracles, certifies every run with a dual
lower bound and an exactly feasible upper bound, and ships the classical
reference computations needed to cross-check the three special cases.
"""

from .analysis import (
    DEFAULT_P_GRID,
    PotentialResult,
    SweepRow,
    certificate_for,
    clarkson_certificate,
    density_continuity_check,
    finite_difference_gradient,
    p_sweep,
    reconstruct_potential,
    sigma_gradient,
)
from .errors import (
    ConvergenceError,
    InputError,
    InternalError,
    ModulusError,
    ParameterError,
    UnsupportedOperationError,
)
from .families import (
    ConnectingFamily,
    ExplicitFamily,
    UsageMatrix,
    ViaVertexFamily,
    WalkFamily,
    rho_shortest_distances,
    usage_row,
)
from .graph import (
    AdmissibilityClass,
    EdgeDensity,
    Graph,
    Walk,
    admissibility_class,
    energy,
    rho_length,
)
from .io import graph_to_edgelist, graph_to_json, parse_graph
from .oracles import (
    FlowResult,
    effective_conductance,
    max_flow_min_cut,
    shortest_hops,
)
from .solver import (
    ModulusResult,
    dual_energy,
    mod_infinity,
    modulus,
    solve_restricted_lp,
    solve_restricted_program,
)

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityClass",
    "ConnectingFamily",
    "ConvergenceError",
    "DEFAULT_P_GRID",
    "EdgeDensity",
    "ExplicitFamily",
    "FlowResult",
    "Graph",
    "InputError",
    "InternalError",
    "ModulusError",
    "ModulusResult",
    "ParameterError",
    "PotentialResult",
    "SweepRow",
    "UnsupportedOperationError",
    "UsageMatrix",
    "ViaVertexFamily",
    "Walk",
    "WalkFamily",
    "admissibility_class",
    "certificate_for",
    "clarkson_certificate",
    "density_continuity_check",
    "dual_energy",
    "effective_conductance",
    "energy",
    "finite_difference_gradient",
    "graph_to_edgelist",
    "graph_to_json",
    "max_flow_min_cut",
    "mod_infinity",
    "modulus",
    "p_sweep",
    "parse_graph",
    "reconstruct_potential",
    "rho_length",
    "rho_shortest_distances",
    "shortest_hops",
    "sigma_gradient",
    "solve_restricted_lp",
    "solve_restricted_program",
    "usage_row",
]
