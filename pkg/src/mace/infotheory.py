"""Exact mutual information, weighted mutual information, and pointwise MI
on small discrete joint distributions.

Natural logarithms throughout; `0 * log(0/x)` terms contribute zero. Serves
as the brute-force oracle for the Monte-Carlo property of the hindsight
bonus, and backs the `wmi-demo` CLI sweep over two illustrative states that
share identical MI but differ in WMI.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class DiscreteJoint:
    """Joint distribution p(action, outcome) with numeric outcome values.

    `outcomes` holds the magnitudes used as WMI weights; `p` has shape
    (len(actions), len(outcomes)) and must sum to 1.
    """

    actions: tuple
    outcomes: tuple
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.shape != (len(self.actions), len(self.outcomes)):
            raise ValueError(f"p shape {p.shape} does not match {len(self.actions)} actions x {len(self.outcomes)} outcomes")
        if np.any(p < 0):
            raise ValueError("joint probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > _NORM_TOL:
            raise ValueError(f"joint probabilities sum to {p.sum()}, not 1")
        if not np.all(np.isfinite(np.asarray(self.outcomes, dtype=np.float64))):
            raise ValueError("outcome values must be finite")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "outcomes", tuple(float(z) for z in self.outcomes))

    def action_marginal(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def outcome_marginal(self) -> np.ndarray:
        return self.p.sum(axis=0)

    def _log_ratio(self) -> np.ndarray:
        """log(p(a,z) / (p(a) p(z))) with zero-probability cells set to 0."""
        pa = self.action_marginal()[:, None]
        pz = self.outcome_marginal()[None, :]
        out = np.zeros_like(self.p)
        mask = self.p > 0.0
        out[mask] = np.log(self.p[mask]) - np.log(pa * pz, where=mask, out=np.zeros_like(self.p))[mask]
        return out


def mutual_information(joint: DiscreteJoint) -> float:
    """Sum of p(a,z) log(p(a,z) / (p(a) p(z)))."""
    return float(np.sum(joint.p * joint._log_ratio()))


def weighted_mutual_information(joint: DiscreteJoint) -> float:
    """MI with each (a, z) term weighted by the outcome value z."""
    weights = np.asarray(joint.outcomes)[None, :]
    return float(np.sum(joint.p * weights * joint._log_ratio()))


def pointwise_mutual_information(joint: DiscreteJoint, a_index: int, z_index: int) -> float:
    """log(p(a,z) / (p(a) p(z))) for a single pair; -inf when p(a,z) = 0."""
    pa = joint.action_marginal()[a_index]
    pz = joint.outcome_marginal()[z_index]
    if pa <= 0.0 or pz <= 0.0:
        raise ValueError("pointwise MI undefined for a zero marginal")
    paz = joint.p[a_index, z_index]
    if paz == 0.0:
        return float("-inf")
    return float(np.log(paz) - np.log(pa * pz))


# Two-action, three-outcome conditionals p(z | a) over outcomes (1, 5, 9).
# Both states carry identical mutual information for every action
# distribution, but the high-value state ties an action to the largest
# outcome, so its weighted mutual information dominates.
DEMO_OUTCOMES = (1.0, 5.0, 9.0)
LOW_VALUE_STATE = ((0.1, 0.8, 0.1),
                   (0.8, 0.1, 0.1))
HIGH_VALUE_STATE = ((0.1, 0.8, 0.1),
                    (0.1, 0.1, 0.8))


def demo_joint(conditionals, p_a1: float) -> DiscreteJoint:
    """Joint over 2 actions x 3 outcomes from p(z|a) rows and p(a1)."""
    if not 0.0 < p_a1 < 1.0:
        raise ValueError("p_a1 must lie strictly inside (0, 1)")
    cond = np.asarray(conditionals, dtype=np.float64)
    pa = np.array([p_a1, 1.0 - p_a1])
    return DiscreteJoint(actions=("a1", "a2"), outcomes=DEMO_OUTCOMES, p=pa[:, None] * cond)


def wmi_demo_sweep(p_a1_grid) -> list:
    """Per-state MI and WMI curves over a grid of action probabilities.

    Returns rows (p_a1, mi_low, mi_high, wmi_low, wmi_high); the MI columns
    coincide while the high-value WMI column dominates the low-value one.
    """
    rows = []
    for p in p_a1_grid:
        low = demo_joint(LOW_VALUE_STATE, p)
        high = demo_joint(HIGH_VALUE_STATE, p)
        rows.append((float(p),
                     mutual_information(low), mutual_information(high),
                     weighted_mutual_information(low), weighted_mutual_information(high)))
    return rows
