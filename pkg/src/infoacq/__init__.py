"""Scoring-rule design and online learning for principal-agent information acquisition."""

from .core import (
    BeliefSupport,
    ContractProblem,
    InformationStructure,
    Instance,
    InvalidInputError,
    JointObservationModel,
    ScoringRule,
    StateSpace,
    UtilityModel,
    agent_profit,
    contract_scoring_rule,
    contract_to_instance,
    derive_information_structure,
    expected_score,
    instance_from_json,
    instance_to_json,
    is_proper,
    mix,
    principal_profit,
    properize,
)
from .agent import AgentView, PublicOutcome, RoundOutcome, best_response
from .harness import (
    Environment,
    ExperimentConfig,
    compute_regret,
    fit_loglog_slope,
    gen_hard_instance,
    gen_random_instance,
    ground_truth_oracle,
    run_experiment,
)
from .learner import BinarySearchState, LearnerConfig, OracleSet, RoundPlan, ScoringRuleLearner
from .offline import ActionSolution, grid_brute_force, solve_lp_k, solve_stackelberg, subopt
from .oracle import (
    LinearContractParams,
    PartialOracleError,
    StronglyProperParams,
    linear_contract_oracle,
    random_sampling_oracle,
    sample_strongly_proper,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
