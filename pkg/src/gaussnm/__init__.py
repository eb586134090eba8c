"""Gaussian dynamical maps driven by colored classical noise, and two tests of
non-Markovianity: dependence of the generator on the initial time, and
non-divisibility of the map family."""

from .channels import (
    GaussianChannel,
    GramMatrix,
    apply,
    compose,
    cm_noise,
    gamma_channel,
    gram_ell,
    gram_g,
    is_cp,
    kraus_density,
    lambda_channel,
    semigroup_deviation,
)
from .diagnostics import (
    detect_nonmonotonicity,
    fidelity,
    fidelity_trajectory,
    find_positivity_violation,
)
from .errors import ConsistencyError, DomainError, NumericError, QuadratureError
from .generator import KossakowskiMatrix, kossakowski, kossakowski_negativity
from .noise import OUKernel, TabulatedKernel, WhiteKernel, check_positive_type, eval_kernel
from .phase_space import (
    OMEGA,
    GaussianState,
    QuadraticHamiltonian,
    is_valid_state,
    sym,
    sym_eigenvalues,
    symplectic_flow,
)

__version__ = "0.1.0"
