"""Exact A-infinity algebras, Hochschild cohomology and formality over Q and Q[h]/h^(N+1)."""

from .ring import QQ, HPoly, Ring
from .graded import GradedModule, MultiMap
from .ainfty import (
    AInftyMorphism, AInftyStructure, CoalgebraMorphism, Coderivation, check_morphism,
    check_morphism_via_bar, check_stasheff, stasheff_via_bar,
)
from .hochschild import coboundary_witness, hochschild_d, specialize_cochain, weight_cohomology
from .transfer import Contraction, DGAlgebra, build_contraction, minimal_model
from .formality import (
    FormalityCertificate, Obstruction, extract_quasi_iso, formality_test, kaledin_class, normal_cone,
)
from .dglie import GradedLie, LieDerivation, MCElement, gauge_decompose, gauge_trivialize, hochschild_as_dglie
from .errors import InputError, InvariantError

__version__ = "0.1.0"
