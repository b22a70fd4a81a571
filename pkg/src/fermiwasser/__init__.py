"""Fermionic optimal transport between finite-dimensional graded quantum systems."""

from .algebra import (FaithfulEvenState, ModularData, StandardFormAlgebra, canonical_standard_form,
                      commutant, modular_data, state_vector, twisted_commutant)
from .car_lattice import FockFrame, LatticeConfig, build_frame, verify_lattice_standard_form
from .channels import CHOI_CONVENTION, Channel
from .detailed_balance import (CopyingMap, FdbReport, check_fdb, copy_system, fdb_deviation, make_copying_map,
                               make_reversible, reverse_channel, reverse_system)
from .duals import accardi_dual, kms_dual, petz_dual, twisted_dual
from .errors import (CompatibilityError, ConfigError, FermiwasserError, NotAPlanError, NotCyclicError,
                     NotFaithfulError, NotHermitianError, SolverError, StructureError)
from .sdp import SdpOptions, SdpProblem, SdpSolution, solve
from .transport import TransportPlan, plan_from_channel, to_fermionic, to_usual
from .wasserstein import CLASSES, GradedSystem, WassersteinResult, cost, extract_isomorphism, wasserstein, wasserstein_all

__version__ = "0.1.0"
