"""Copula-based measure of multivariate dependence with a checkerboard estimator."""
from ._backend import BACKEND
from .copulas import (c_cube, c_cube_tilde, minimum, product, reference_copula,
                      sample_marshall_olkin, sample_scenario, w_copula)
from .core import (CheckerboardCopula, ConditionalCdf, DependenceEstimate, DomainError,
                   PseudoSample, ResourceError, Sample, cell_of, marginalize)
from .empirical import empirical_checkerboard, ranks, resolution_for
from .harness import permutation_test, simulate
from .linkage import (linkage_checkerboard, linkage_conditionally_independent,
                      linkage_monte_carlo, linkage_of_empirical, rosenblatt_forward,
                      rosenblatt_inverse)
from .measure import (MetricResult, conditional_cdf, d1, d_infty, d_p, pairwise_profile,
                      phi, zeta1_estimate, zeta1_exact)

__version__ = "0.1.0"
