"""Steady incompressible flow with high-order triangular spectral elements."""

from ._semflow import (
    CaseConfig,
    InputError,
    InvertedElementError,
    Mesh,
    MeshError,
    SemflowError,
    Solution,
    SolverError,
    boundary_length,
    build_mesh,
    default_config,
    direct_uses_umfpack,
    gll_points,
    load_config,
    parse_config,
    read_msh,
    reference_nodes,
    run_case,
    solve,
    sweep,
)

__version__ = "0.1.0"
