"""Truthful auction-based bandwidth allocation for target tracking.

A fusion center tracks a moving target with a particle filter while buying
quantized measurements from selfish sensors.  Each step it runs a reverse
auction: expected Fisher-information traces value the bits, Myerson virtual
valuations price them, an exact multiple-choice knapsack dynamic program
picks the winners, and threshold payments keep everyone honest.
"""

from .auction import (
    EPSILON_AMP,
    StepContext,
    UniformValuation,
    ValuationModel,
    build_instance,
    build_step_context,
    energy_factor,
    item_value,
    solve_allocation,
    transmit_energy,
    virtual_valuation,
)
from .dynamics import MotionModel, build_motion_model, reverse_velocity, sample_initial, step
from .filtering import (
    ParticleCloud,
    estimate,
    initial_cloud,
    predict,
    resample,
    update_weights,
)
from .fisher import expected_fim, expected_trace_table, info_coefficient, pointwise_fim, prior_fim
from .mckp import MckpInstance, MckpSolution, brute_force, solve_dp
from .payment import allocation_for_report, compute_all_payments, compute_payment, find_thresholds
from .sensing import (
    Quantizer,
    SensorNode,
    SignalModel,
    amplitude,
    build_quantizer,
    build_quantizer_bank,
    joint_likelihood,
    level_probability,
    measure,
    quantize,
)
from .sim import (
    CampaignResult,
    ConfigError,
    Scenario,
    StepRecord,
    TrialResult,
    baseline_fim_allocation,
    run_campaign,
    run_trial,
)

__version__ = "0.1.0"
