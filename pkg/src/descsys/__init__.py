"""Analysis and simulation of singular linear discrete-time systems.

Covers regular matrix pencils and their canonical decomposition,
closed-form trajectories of descriptor systems in standard and backward
fractional form, consistency of initial states, causality analysis, and
independent brute-force verification of every solver output.
"""

from .causality import (
    CausalityReport,
    causality_report,
    check_output_causality,
    check_state_causality,
    fractional_causality,
    maximal_causal_B,
    output_witness,
)
from .errors import (
    ConvergenceError,
    DescsysError,
    DomainError,
    HorizonError,
    IllConditionedError,
    InconsistentICError,
    NotNilpotentError,
    OracleInapplicable,
    RegularityError,
    SolvabilityError,
    StructuralError,
)
from .fracops import (
    FracOrder,
    SeriesControl,
    mittag_leffler,
    nabla_fractional_difference,
    nabla_fractional_sum,
    nabla_fractional_sum_sequence,
    rising_factorial,
    rl_difference_sequence,
)
from .oracle import (
    ResidualReport,
    recursive_solve_invertible,
    residual_fractional,
    residual_standard,
    stacked_solve,
)
from .pencil import (
    FiniteSpectrum,
    Pencil,
    RegularityReport,
    WeierstrassForm,
    finite_spectrum,
    is_regular,
    nilpotency_index,
    partitions,
    validate_weierstrass,
    weierstrass_decompose,
)
from .solver import (
    ConsistencyResult,
    DescriptorSystem,
    InputSignal,
    SolvabilityReport,
    Trajectory,
    check_consistency,
    check_fractional_solvability,
    d_k_fractional,
    d_k_standard,
    effective_inputs,
    general_solution_standard,
    project_consistent,
    solve_fractional,
    solve_standard,
)

__version__ = "0.1.0"

__all__ = [
    "CausalityReport",
    "ConsistencyResult",
    "ConvergenceError",
    "DescriptorSystem",
    "DescsysError",
    "DomainError",
    "FiniteSpectrum",
    "FracOrder",
    "HorizonError",
    "IllConditionedError",
    "InconsistentICError",
    "InputSignal",
    "NotNilpotentError",
    "OracleInapplicable",
    "Pencil",
    "RegularityError",
    "RegularityReport",
    "ResidualReport",
    "SeriesControl",
    "SolvabilityError",
    "SolvabilityReport",
    "StructuralError",
    "Trajectory",
    "WeierstrassForm",
    "causality_report",
    "check_consistency",
    "check_fractional_solvability",
    "check_output_causality",
    "check_state_causality",
    "d_k_fractional",
    "d_k_standard",
    "effective_inputs",
    "finite_spectrum",
    "fractional_causality",
    "general_solution_standard",
    "is_regular",
    "maximal_causal_B",
    "mittag_leffler",
    "nabla_fractional_difference",
    "nabla_fractional_sum",
    "nabla_fractional_sum_sequence",
    "nilpotency_index",
    "output_witness",
    "partitions",
    "project_consistent",
    "recursive_solve_invertible",
    "residual_fractional",
    "residual_standard",
    "rising_factorial",
    "rl_difference_sequence",
    "solve_fractional",
    "solve_standard",
    "stacked_solve",
    "validate_weierstrass",
    "weierstrass_decompose",
]
