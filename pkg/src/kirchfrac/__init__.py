"""Numerics for variable-order fractional p(x,y)-Kirchhoff systems.

Variable-exponent Lebesgue and fractional Sobolev quantities, the nonlocal
operator in weak form, the Kirchhoff energy with its derivative, and a
descent solver with Ekeland-style certificates.
"""
from .errors import (AccuracyWarning, DomainError, EvaluationError, PreconditionError,
                     SingularKirchhoffError, SingularKirchhoffWarning, StallError)
from .exponents import (ExponentField, conjugate_exponent, critical_exponent, exponent_preset,
                        validate_exponents)
from .grid import DiscreteField, DomainSpec, random_field
from .quadrature import QuadratureOptions, gagliardo_rule
from .spaces import (embedding_ratio, estimate_embedding_constant, fractional_modular,
                     gagliardo_norm, holder_pairing, lebesgue_modular, luxemburg_norm,
                     modular_report, weighted_modular_delta, x_norm)
from .operator import (WeakFormAssembly, apply_pointwise, assemble_weak_residual,
                       weak_form_assembly, weak_pairing)
from .problem import (EnergyProblem, KirchhoffSpec, PotentialSpec, SourceSpec,
                      check_M_condition, kirchhoff_antiderivative, kirchhoff_preset,
                      potential_preset, source_preset)
from .energy import coercivity_lower_bound, energy, gateaux_gradient
from .minimizer import (MinimizerConfig, MinimizerResult, coercivity_ray_scan,
                        ekeland_certificate, minimize)
from .properties import report_properties

__version__ = "0.1.0"
