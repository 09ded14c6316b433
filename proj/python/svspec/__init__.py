"""svspec: spectral direct/inverse computations for matrix Sturm-Liouville operators."""

try:
    from ._svspec import (  # noqa: F401
        MatrixPotential,
        SvspecError,
        assemble_dataset,
        condition_C_finite,
        diagonalize_mean,
        discrete_hilbert,
        evaluate_M,
        locate_all,
        reconstruct_M,
        residue_via_contour,
        scalar_convert,
        set_threads,
        solve_endpoints,
        __version__,
    )
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _svspec import (  # noqa: F401
        MatrixPotential,
        SvspecError,
        assemble_dataset,
        condition_C_finite,
        diagonalize_mean,
        discrete_hilbert,
        evaluate_M,
        locate_all,
        reconstruct_M,
        residue_via_contour,
        scalar_convert,
        set_threads,
        solve_endpoints,
        __version__,
    )

__all__ = [
    "MatrixPotential",
    "SvspecError",
    "assemble_dataset",
    "condition_C_finite",
    "diagonalize_mean",
    "discrete_hilbert",
    "evaluate_M",
    "locate_all",
    "reconstruct_M",
    "residue_via_contour",
    "scalar_convert",
    "set_threads",
    "solve_endpoints",
    "__version__",
]
