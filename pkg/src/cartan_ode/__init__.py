"""Point invariants, Cartan coframe and Fefferman metrics of second-order ODEs."""

from .cartan import build_coframe, connection_and_curvature, curvature_scalars, structure_residuals
from .duality import GeneralSolution, dual_eliminate, dual_from_section, prop2_check
from .einstein import CaseTwoFamily, case2_build, case3_residual, classify_conformal_einstein
from .expr import ZeroTest, is_zero, normalize, simplify
from .exterior import Chart, DifferentialForm, d, ext_d, pullback, wedge
from .fefferman import bach_condition, fefferman_metric, petrov_NN_check
from .jet import OdeProblem, branch_classify, identity_to1_residual, tresse_forms, w1, w2
from .parser import parse
from .realify import CrTwoSymmetry, realify
from .tensors import CurvatureBundle, MetricField

__version__ = "0.1.0"
