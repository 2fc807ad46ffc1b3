"""liftsim: simulation and benchmarking of motorized patient-lift push assistance.

A longitudinal lift/patient plant (cart plus hanging pendulum), the candidate
assistance controllers (friction compensation, force amplification, fixed and
variable admittance, second-order shaping), comfort/effort/ISO metrics, a
virtual caregiver, and a deterministic CLI harness that writes CSV reports
and optional figures.
"""

from .actuation import (MotorLimits, PlantContext, VelocityLoopParams,
                        clamp_speed, cut_at_speed_cap, ideal_tracking_force,
                        velocity_loop_force)
from .controllers import (AdmittanceParams, ControllerConfig, ControllerState,
                          ForceAmpParams, FrictionCompParams,
                          InfeasibleTimeConstant, SecondOrderParams,
                          VariableAdmittanceParams, admittance_step,
                          force_amplification, friction_compensation,
                          matched_force_amp_gain, presets, second_order_step,
                          steady_state_velocity, tune_time_constant,
                          variable_admittance_step, variable_damping)
from .dynamics import (ForceBreakdown, FrictionParams, InvalidStateError,
                       PlantParams, PlantState, SimulationDiverged,
                       friction_force, pendulum_energy, plant_derivatives, step)
from .metrics import (ComfortWeights, RunMetrics, TimeSeries, comfort_a_w,
                      comfort_class, count_overshoots, effort_integrals,
                      emulate_sensors, overall_rms_acceleration,
                      patient_acceleration, start_and_drive_forces)
from .simulate import RunResult, Trajectory, compute_metrics, run, simulate
from .version import TOOL_VERSION
from .virtual_user import (ReferenceProfile, TaskScenario, UserModel,
                           scenario_library, user_force)

__version__ = TOOL_VERSION
