"""Exact computations with linear q-difference systems over Q(x): q-calculus,
curvature reductions modulo primes, rational solutions and Galois-group
classification of small families."""

__version__ = "0.1.0"

from .arithmetic import (ChiBound, CurvatureVerdict, PrimeProfile, ScanReport, SizeEstimate,
                         chi_bounds, chi_truncated, compare_kappa_profiles, curvature_is_identity,
                         curvature_matrix, curvature_scan, kappa_sum_partial, prime_profile,
                         size_partial, unipotent_order)
from .classify import (GroupDescriptor, HypergeomParams, SchwarzVerdict, galois_antidiagonal2,
                       galois_rank1, galois_triangular2, goursat_rational, hypergeom_system,
                       log_singularity_infinity, log_singularity_zero, phi21_truncate,
                       schwarz_algebraic, schwarz_rational)
from .core import (ModMatrix, ModRing, Poly, QExp, RatFun, RatMatrix, dilate, gauss_valuation,
                   mod_reduce, q_power_test, q_rational_power_test, qderive)
from .errors import (BadPrime, DegenerateEquation, DomainError, HypothesisNotMet, Inconclusive,
                     NotAUnit, ParseError, PoleAtZero, QDiffError, Resonant, SearchExhausted,
                     UndefinedParameters)
from .qcalc import q_binomial, q_factorial, q_factorial_valuation, q_int
from .qmodule import (DeltaSystem, QDiffSystem, casorati_rank, constant_form_at_zero, cyclic_vector,
                      delta_matrices, formal_solution, phi_iterate)
from .solver import (GrothendieckReport, RationalSolutionBasis, grothendieck_test,
                     is_trivial_over_formal, order1_kummer_test, order1_rational_test,
                     rational_solutions)
from .cli import parse_ratfun
