"""Piecewise-constant graph signal estimation with an l2,0 edge penalty.

Two solvers are provided: a spectral embedding followed by k-means
(:func:`solve_p2_screen`) and heat-bath simulated annealing
(:func:`anneal`).  :func:`solve_map` applies the same machinery to
semi-supervised labelling.
"""
from .annealing import SAState, Schedule, anneal, hamiltonian, heat_bath_probabilities
from .errors import *  # noqa: F401,F403
from .graph import (
    Graph,
    build_graph,
    components,
    inter_community_edges,
    is_connected,
    knn_graph,
    planted_partition,
    read_edge_list,
    repair_connectivity,
    write_edge_list,
)
from .metrics import input_snr_db, misclassification, recon_snr_db, roc_curve, sigma2_for_snr
from .model import (
    GtfSolution,
    boundary_edges,
    centroid_closed_form,
    compact_labels,
    cut_size,
    l20_penalty,
    laplacian_trace,
    make_solution,
    objective_p0,
    objective_p1,
    objective_q2,
    one_hot,
)
from .oracle import bell_number, brute_force_p1, brute_force_q1, enumerate_partitions, numeric_gradient
from .spectral import (
    build_embedding,
    gram_top_eigenpairs,
    kmeans,
    optimal_alpha,
    solve_p2_fixed_k,
    solve_p2_path,
    solve_p2_screen,
    top_eigenpairs,
    vpp_objective,
)
from .ssl import (
    MapInstance,
    MapSolution,
    closed_form_b,
    literal_divergence,
    objective_q,
    objective_q1,
    predict,
    solve_map,
)

__version__ = "0.1.0"
