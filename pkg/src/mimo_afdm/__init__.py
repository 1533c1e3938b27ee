"""Link-level MIMO-AFDM simulation with eSNR-sparsified conjugate-gradient precoding."""

from .afdm import (
    AfdmParams,
    ModulationAlphabet,
    build_daft_matrix,
    daft_demodulate,
    daft_modulate,
    default_c1,
    qam_demodulate,
    qam_modulate,
)
from .channel import (
    ChannelProfile,
    MimoChannelSpec,
    PathSpec,
    apply_channel,
    build_link_matrix,
    build_mimo_matrix,
    build_path_matrix,
    build_time_domain_path_matrix,
    doppler_spreading_factor,
    index_indicator,
    phase_factor,
)
from .metrics import FlopsParams, ber, flops_analytic, sinr_user
from .solvers import (
    NonPositiveCurvatureError,
    SolveReport,
    SolverConfig,
    cg_solve,
    pcg_precode,
    pcg_solve,
    rka_solve,
    swor_rka_solve,
    zf_precode,
)
from .sparse import FlopCounter, SparseChannelMatrix, element_esnr, sparsify, spmv, spmv_adjoint
from .sim import SimConfig, SweepRow, parse_config, run_ber_sweep, run_complexity_sweep

