"""Correlation clustering by neighborhood-agreement sparsification.

Drop edges whose endpoints' neighborhoods differ too much, drop edges between
vertices that lost too many neighbors, and read the clusters off the
connected components of what is left.  The same pipeline runs in memory, on a
simulated massively-parallel machine model with a constant round count, and
as a fixed-pass edge-stream computation.
"""

from .agreement import (Params, SparsifiedGraph, degree_compatible,
                        exact_agreement_oracle, in_weak_agreement_exact, sparsify)
from .components import (Clustering, label_propagation_4, union_find_components,
                         validate_diameter, write_clustering)
from .evaluation import (ClusterStats, brute_force_opt, cluster_stats, clustering_cost,
                         gen_gnp, gen_planted, gen_tight_instance, pivot_baseline)
from .graph import (SignedGraph, build_graph, induced_degree, intersection_size,
                    load_edge_list, sym_diff_size)
from .mpc import MPC_ROUNDS, MpcConfig, MpcTrace, run_mpc_pipeline, shuffle
from .pipeline import PipelineRun, run_inmem_pipeline
from .sketch import (SampleSketch, agreement_sampled, build_sketches, level_index,
                     sample_member, sketch_agreement_oracle)
from .streaming import (PASS_COUNT, FileEdgeStream, ListEdgeStream, StreamResult,
                        run_streaming_pipeline)

__version__ = "0.1.0"

__all__ = [
    "Params", "SparsifiedGraph", "degree_compatible", "exact_agreement_oracle",
    "in_weak_agreement_exact", "sparsify",
    "Clustering", "label_propagation_4", "union_find_components",
    "validate_diameter", "write_clustering",
    "ClusterStats", "brute_force_opt", "cluster_stats", "clustering_cost",
    "gen_gnp", "gen_planted", "gen_tight_instance", "pivot_baseline",
    "SignedGraph", "build_graph", "induced_degree", "intersection_size",
    "load_edge_list", "sym_diff_size",
    "MPC_ROUNDS", "MpcConfig", "MpcTrace", "run_mpc_pipeline", "shuffle",
    "PipelineRun", "run_inmem_pipeline",
    "SampleSketch", "agreement_sampled", "build_sketches", "level_index",
    "sample_member", "sketch_agreement_oracle",
    "PASS_COUNT", "FileEdgeStream", "ListEdgeStream", "StreamResult",
    "run_streaming_pipeline",
    "__version__",
]
