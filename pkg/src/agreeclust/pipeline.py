"""Single-process pipeline: sparsify, then exact connected components."""

from __future__ import annotations

from dataclasses import dataclass

from .agreement import Params, SparsifiedGraph, exact_agreement_oracle, sparsify
from .components import Clustering, union_find_components
from .graph import SignedGraph
from .sketch import sketch_agreement_oracle

__all__ = ["PipelineRun", "run_inmem_pipeline", "make_oracle"]


@dataclass(frozen=True)
class PipelineRun:
    clustering: Clustering
    sparsified: SparsifiedGraph
    oracle_label: str


def make_oracle(g: SignedGraph, params: Params, mode: str):
    """Agreement oracle for the requested mode: "exact" or "sketch"."""
    if mode == "exact":
        return exact_agreement_oracle(g, params.beta)
    if mode == "sketch":
        return sketch_agreement_oracle(g, params)
    raise ValueError(f"unknown oracle mode {mode!r}")


def run_inmem_pipeline(g: SignedGraph, params: Params, mode: str = "exact") -> PipelineRun:
    """Sparsify with the chosen oracle and read off exact components."""
    oracle = make_oracle(g, params, mode)
    sg = sparsify(g, params, oracle)
    clustering = union_find_components(sg)
    return PipelineRun(clustering=clustering, sparsified=sg, oracle_label=oracle.label)
