"""sidewise: boundary-flux tracking controls for the 1-d wave equation.

Synthesizes Dirichlet controls at x = 0 so that the slope y_x at the far end
x = L follows a prescribed profile after the minimal travel time, for BV
coefficient pairs (rho, a).  Ships a finite-difference forward/adjoint
solver, a dual variational (Gramian/conjugate-gradient) control synthesizer,
a constructive method-of-characteristics builder for unit coefficients, and
an observability diagnostics suite with the explicit constant.
"""

from .coefficients import (CoefficientField, beta, bounds, from_csv,
                           minimal_time, theoretical_observability_constant,
                           total_variation)
from .wave_solver import (Grid1D, SpaceTimeField, TimeSignal, discrete_energy,
                          extract_flux, field_from_binary, field_to_binary,
                          field_to_csv, make_grid, solve_adjoint, solve_forward)
from .hum_control import (ControlResult, SidewiseProblem, functional_J,
                          gradient_J, gramian_apply, minimize_J, pairing,
                          penalized_optimal_control, reduce_initial_data)
from .characteristics import (SpliceSpec, build_control, hermite_bridge,
                              leftward_solve, make_sidewise_grid, splice_profile,
                              step1_flux_trace, verify_onesided_uniqueness)
from .observability import (ObservabilityReport, check_energy_bound,
                            discretization_allowance, dual_pairing_factored,
                            empirical_observability_ratio, extend_parity,
                            h1_star_norm, observability_report,
                            sample_boundary_data, sidewise_energy)

__version__ = "0.1.0"
