"""Exit times, exit moments and volume concentration for tubes and balls of the round sphere."""
from .concentration import (ScanRow, VolumeCap, levy_lower_bound, rigidity_volume_cap, scan,
                            sphere_theorem_threshold, tube_tail_fraction, tube_volume_fraction,
                            volume_fraction_table)
from .errors import (AccuracyError, BlowUpError, DomainError, GridError, NonConvergenceError,
                     SphexitError)
from .exit_solver import (BoundProfile, RadialProfile, bound_profile, closed_form_ball_n2,
                          closed_form_tube_n2, exit_time_ball, exit_time_tube, factorial_cap,
                          limit_diagnostic, log_lower_bound_F, lower_bound_F, moment_ball,
                          moment_hierarchy, moment_tube, pde_residual, upper_bound_G)
from .geometry import (NEGATIVE_INFINITY, BallGeometry, KernelAccuracy, RiccatiPath, TubeGeometry,
                       cos_power_integral, cos_power_integral_table, cos_power_ratio,
                       log_sphere_volume, mean_curvature_ball, mean_curvature_tube,
                       sin_power_integral, sin_power_ratio, solve_riccati, sphere_volume,
                       wallis_integral)
from .stochastic import (ExitSampleStats, SimulationConfig, convergence_sweep, simulate,
                         simulate_exit_ball, simulate_exit_tube)

__version__ = "0.1.0"
