"""Moment-map flows, critical-point classification and Hecke correspondences
for representations of quivers."""

from .quiver import (
    Quiver,
    QuiverReport,
    canonical_stability,
    check_quiver,
    crawley_boevey_frame,
    degree_rank_slope,
    double_quiver,
    framed_dims,
    handsaw_roles,
    handsaw_to_quiver,
    induced_parameter,
    is_admissible,
    reverse_quiver,
    unit_dims,
    validate_quiver,
)
from .rep import (
    Representation,
    central_element,
    direct_sum,
    embed_rep,
    energy,
    grad_energy,
    grad_norm,
    group_act,
    hessian_apply,
    hessian_matrix,
    holomorphic_symplectic_pairing,
    inf_action,
    inf_action_adjoint,
    moment_complex,
    moment_minus_alpha,
    moment_real,
    random_rep,
    restrict_rep,
    rep_distance,
)
from .flow import BatchItem, FlowOptions, FlowResult, flow, flow_batch, trajectory_csv
from .critical import (
    ClassifyTols,
    CriticalProfile,
    SliceDecomposition,
    classify_critical,
    grassmann_project,
    hessian_spectrum,
    negative_slice_basis,
    slice_decompose,
    stratum_codim,
)
from .correspond import (
    FlowLinePair,
    Intertwiner,
    LagrangianReport,
    affine_project,
    flowline_to_hecke,
    handsaw_adjoint,
    handsaw_constraint,
    handsaw_hecke_check,
    hecke_check,
    hecke_to_flowline,
    intertwiner_space,
    is_isomorphic,
    lagrangian_check,
    snap_rep,
)
from .oracles import (
    PolystabilityReport,
    ThinSubrepLattice,
    fd_gradient,
    fd_hessian,
    polystable_by_flow,
    thin_admissible_subsets,
    thin_hn_type,
    thin_is_stable,
)
from .selfcheck import run_selfcheck

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
