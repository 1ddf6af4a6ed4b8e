"""Poly-Sinc collocation for elliptic PDEs with random diffusion fields.

The pipeline: expand the random coefficient in an orthonormal Legendre
chaos, project with stochastic Galerkin to get a coupled block of
deterministic elliptic equations, collocate every block on tensor Sinc
grids with stable Lagrange interpolation, and solve the resulting tall
least-squares system.  Reference solvers (finite differences, closed-form
benchmark moments, quadrature sampling) live alongside for validation.
"""
from .chaos import (
    ChaosBasis,
    MultiIndexSet,
    TripleTensor,
    chaos_basis,
    gauss_legendre,
    gram_matrix,
    legendre_orthonormal,
    multi_index_set,
    pce_mean,
    pce_realize,
    pce_variance,
    triple_tensor,
    triple_tensor_triplets,
)
from .colloc import (
    GlobalSystem,
    PceSolution,
    build_global_system,
    deterministic_solve,
    solve_least_squares,
)
from .config import RunConfig, bundled_config, load_config, parse_config
from .errors import (
    CoercivityError,
    ConfigError,
    DomainError,
    SolveError,
)
from .expressions import evaluate, to_source
from .gridio import (
    read_field_csv,
    read_summary_json,
    read_table_csv,
    write_field_csv,
    write_summary_json,
    write_table_csv,
)
from .model import (
    CoupledSystem,
    SpdeProblem,
    galerkin_assemble,
    parse_coefficient,
    realized_coefficient,
    validate_coercivity,
)
from .reference import (
    DecayFit,
    ErrorReport,
    SemiAnalyticExample1,
    UniformGrid,
    block_moments,
    decay_fit,
    default_lattice,
    error_norms,
    fd_solve,
    fd_solve_block,
    lift_uniform,
    make_fd_sampler,
    make_polysinc_sampler,
    sampled_reference,
    semi_analytic_example1,
    tensor_gauss,
)
from .sincgrid import (
    DiffMatrices,
    SincGrid,
    TensorInterpolant,
    classic_step,
    default_step,
    interp_eval,
    interp_eval_lattice,
    lagrange_basis_eval,
    lagrange_basis_matrix,
    lebesgue_estimate,
    lebesgue_measured,
    second_derivative_matrix,
    sinc_points,
)

__version__ = "0.1.0"
