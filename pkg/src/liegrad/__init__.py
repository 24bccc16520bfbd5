"""Gradient estimation for exponentiated Pauli ansatze ``U(a) = exp(iA(a))``."""

from .errors import (ContractError, DimensionMismatch, DLABlowup, LiegradError,
                     MissingHadamardValue, NumericalError, ParseError, ResourceError,
                     StructuralError, SubgroupBlowup)
from .pauli import (PauliLabel, PauliSum, PhasedPauli, apply_ad, circ, circledast,
                    commutator_label, commutes, decode, encode, odot, parse_parameters,
                    parse_pauli_sum, pauli_product, symplectic_form)
from .groups import (SubgroupBasis, compatibility_groups, generated_subgroup,
                     index_complexity, is_subgroup)
from .gradients import (GradientReport, b_matrix, build_V, phi1, poisson_gradient,
                        series_gradient, series_partial, short_term_gradient,
                        subgroup_gradient, truncated_gradient, truncation_bound)
from .dla import LieBasis, adjoint_matrix, build_dla, dla_gradient
from .clifford import CliffordElement, clifford_matrix, enumerate_cliffords, sample_clifford
from .shadows import (LocalShadowRecord, ShadowRecord, collect_pauli_shadows,
                      collect_shadows, median_of_means, pauli_shadow_expectation,
                      sample_shadow_measurement, shadow_expectation, shadow_gradient)

__version__ = "0.1.0"
