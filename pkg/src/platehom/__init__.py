"""Homogenized bending of periodic plates along developable isometries."""
from .cellprob import (CellSolution, Direction, line_family, q_av, q_av_direction, rationality,
                       solve_cell, verify_cell)
from .config import RunConfig, parse_config, validate_config
from .energy import QuadratureSpec, energy_av, energy_eps, energy_hom, l2_distance
from .errors import (ChartMismatch, ClassificationMismatch, ConfigError, DetDegenerate, EllipticityViolation,
                     EmptyCoefficients, IrrationalDirection, NewtonDivergence, NonContiguousPieces,
                     OutOfRange, ParseError, PlateHomError, QuadratureNotConverged, SelfOverlap,
                     ValidationError)
from .material import (PeriodicQuadraticForm, SymTensor2, grid, identity_form, laminate,
                       random_material, validate_ellipticity)
from .recovery import (BumpWindow, ConvergenceReport, LowerBoundReport, ThetaProfile, build_theta,
                       convergence_study, lower_bound_probe, two_scale_coefficient)
from .surface import (CurvaturePiece, DevelopableChart, ImmersionSampler, RankOneForm, build_chart,
                      classify, write_mesh)

__version__ = "0.1.0"
