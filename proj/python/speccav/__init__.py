"""Random sparse matrix spectra: power iteration and the cavity method."""

from ._core import (
    DegreeSpec,
    Graph,
    __version__,
    ensemble_first_eigenvalues,
    find_lambda,
    first_eigenpair,
    fit_scaling,
    fit_tail,
    generate_graph,
    histogram,
    normalize,
    run_experiment,
)

__all__ = [
    "DegreeSpec",
    "Graph",
    "ensemble_first_eigenvalues",
    "find_lambda",
    "first_eigenpair",
    "fit_scaling",
    "fit_tail",
    "generate_graph",
    "histogram",
    "normalize",
    "run_experiment",
]
