"""Coupled cubic Klein-Gordon experiments.

Fields are numpy arrays of shape (points,) * dim in C order, matching
``Grid.coordinates()`` along every axis.
"""

from ._core import (
    Grid,
    Params,
    boost_rotation,
    candidate_levels,
    classify,
    evolve,
    free_evolve,
    functionals,
    ground_state,
    h0,
)

__all__ = [
    "Grid",
    "Params",
    "boost_rotation",
    "candidate_levels",
    "classify",
    "evolve",
    "free_evolve",
    "functionals",
    "ground_state",
    "h0",
]
