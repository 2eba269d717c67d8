"""trainopt: training-overhead optimization for short-packet fading links
and joint communication/sensing MIMO training-sequence design."""

__version__ = "0.1.0"

from .errors import (AllInfeasibleError, DomainError, EvaluationError,
                     InfeasibleError, InvalidScenarioError,
                     MaxIterationsError, SingularMatrixError, SolverError,
                     TrainoptError)
from .specfun import (McOracle, Quadrature, default_quadrature,
                      exp_integral_e1, exp_integral_e1_scaled, expect_exp,
                      exponential_samples, mc_expect, q_func, q_inv)
from .fading import (EstimationError, Fading, PilotScenario, block_error_var,
                     doppler_var, effective_snr, total_error_var)
from .rate import (DISPERSION_HIGH_SNR_LIMIT, RateBreakdown,
                   channel_dispersion, ergodic_capacity, ergodic_rate,
                   finite_block_rate, mean_inverse_one_plus)
from .pilot_opt import (AlphaMode, OverheadSolution, SweepRow, SweepSpec,
                        optimize_alpha, optimize_alpha_ergodic, run_sweep,
                        write_sweep_csv)
from .comsens_model import (AuxMatrix, ComsensProblem, ComsensSettings,
                            TrainingPair, aux_objective, build_problem,
                            channel_mse, correlation, correlation_db,
                            exp_covariance, load_matrix_text, optimal_aux,
                            save_matrix_text, shift_matrix)
from .comsens_design import (DesignResult, DesignTrace, correlation_report,
                             design, solve_x_subproblem, solve_y_subproblem,
                             target_matrices, write_design_files)
from .radar import RadarScenario, is_detectable, max_sensing_range
