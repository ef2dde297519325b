"""Thermalization and thermal entanglement of the open quantum Rabi model."""

__version__ = "0.1.0"

from .baths import BathConfig, Topology, cross_rate, thermal_occupation
from .entangle import (DensityMatrix, NegativityMap, NegativityResult, log_negativity,
                       negativity_map, partial_transpose_mode, thermal_density_matrix,
                       trace_norm)
from .errors import (ConfigError, DegeneracyEncountered, DegenerateGap, DimensionTooLarge,
                     EigensolverFailure, InsufficientSupport, NonUniqueSteadyState,
                     RabiThermoError, SingularSolve, TruncationInadequate,
                     UndefinedTemperature)
from .lindblad import (Liouvillian, RateMatrix, TransitionTable, build_liouvillian,
                       rate_matrix, rates_chb, rates_ihb, transition_table)
from .qrm_core import (Eigensystem, ModelParams, build_hamiltonian, build_parity,
                       diagonalize, eigensystem, find_crossings, spectrum_scan)
from .steady import (SteadyPopulations, check_truncation, solve_liouvillian_steady,
                     solve_rate_steady)
from .thermo import (EffTempReport, GibbsPopulations, effective_temperature,
                     gibbs_populations, thermalization_report)
