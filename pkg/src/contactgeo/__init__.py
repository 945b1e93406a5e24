"""Contact-geometric phase space toolkit.

Expression-backed differential geometry on the (2n+1)-dimensional Darboux
phase space: Heisenberg frames, contact Hamiltonian flows, almost (para)
contact structures and their scaled deformations, the metrics they induce,
curvature, and Legendre-submanifold pullbacks from fundamental relations.
"""

from .expr import (EvalError, Expr, ParseError, const, differentiate, evaluate,
                   parse, to_string, var)
from .phase_space import (CoordinateMap, PhasePoint, PhaseSpace, TensorField,
                          coframe, contact_form, d_eta, frame, sample_points)
from .hamiltonian import (ContactHamiltonian, IndexSubset, closed_form_commutator,
                          generator_commutator, hamiltonian_vector_field,
                          integrate_flow, legendre_map, partial_legendre,
                          rotation_flow, rotation_generator, scaling_flow,
                          scaling_generator, scaling_map)
from .structures import (LambdaFamily, StructureKind, build_structure,
                         check_structure_identities, lambda_legendre_residual,
                         lambda_scaling_residual, product_lambda)
from .metrics import (Metric, MetricKind, associated_residual,
                      compatibility_residual, frame_gram, metric_from_structure,
                      pullback)
from .calculus import (CurvatureReport, SingularMetricError, christoffel,
                       kappa, killing_residual, lie_bracket, lie_derivative,
                       nabla_reeb, ricci)
from .equilibrium import (FundamentalRelation, SystemCatalogEntry, catalog,
                          embed, hessian, involution_check, legendre_potential,
                          pullback_metric_on_E)

__version__ = "0.1.0"
