"""Decentralized multi-agent coordinated exploration workbench.

Agents broadcast one scalar per step (their local observation novelty),
approximate the unavailable global novelty by the sum of everyone's local
novelties, and additionally earn a hindsight bonus for actions associated
with other agents' high future novelty, measured through weighted mutual
information. Independent PPO trains one unshared policy per agent on the
shaped rewards; the grid task suite, an exact MI/WMI lab, and an experiment
harness round out the workbench.
"""

from .bus import NoveltyBus, ProtocolError
from .config import RunConfig
from .gridworld import Action, GridEnv, Layout, TaskSpec, evaluate_doors, load_task, make_task
from .infotheory import (
    DiscreteJoint,
    mutual_information,
    pointwise_mutual_information,
    weighted_mutual_information,
    wmi_demo_sweep,
)
from .ippo import AgentLearner, collect_rollout, evaluate_rollout, gae, ppo_update, train
from .nets import Adam, Mlp
from .novelty import RndNovelty, VisitCounts
from .rewards import (
    CountPosterior,
    MlpPosterior,
    RewardConfig,
    RewardMode,
    accumulate,
    discretize_z,
    hindsight_bonus,
    relabel,
    scalable_hindsight_bonus,
    shaped_reward,
)

__version__ = "0.1.0"

__all__ = [
    "Action", "Adam", "AgentLearner", "CountPosterior", "DiscreteJoint",
    "GridEnv", "Layout", "Mlp", "MlpPosterior", "NoveltyBus", "ProtocolError",
    "RewardConfig", "RewardMode", "RndNovelty", "RunConfig", "TaskSpec",
    "VisitCounts", "accumulate", "collect_rollout", "discretize_z",
    "evaluate_doors", "evaluate_rollout", "gae", "hindsight_bonus",
    "load_task", "make_task", "mutual_information",
    "pointwise_mutual_information", "ppo_update", "relabel",
    "scalable_hindsight_bonus", "shaped_reward", "train",
    "weighted_mutual_information", "wmi_demo_sweep",
]
