"""Reward shaping for picks made before willingness is revealed.

The true one-pick reward is the expected influence gain over every
willingness outcome of the nodes already pending this round, which costs
2^(pending count) influence evaluations. Because those per-outcome gains
interpolate between two extremes, a two-point estimate that blends only the
extreme cases recovers the exact expectation whenever the per-level gains
form an arithmetic sequence, and is otherwise off by a computable bounded
amount. The two extremes:

  * gain_none_willing: gain of the pick when every pending node refuses,
    evaluated on top of the confirmed willing set alone.
  * gain_all_willing: gain when every pending node participates, evaluated
    on top of willing + pending.

The blend weights are (1 - willing_prob) and willing_prob.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "RewardTerms",
    "compute_reward_terms",
    "surrogate_reward",
    "exact_expected_reward",
    "gap_bound",
    "gap_cases",
    "evaluation_count_audit",
    "MAX_EXACT_PENDING",
]

# exact_expected_reward enumerates 2^(pending count) outcomes.
MAX_EXACT_PENDING = 12


@dataclass(frozen=True)
class RewardTerms:
    """Extreme-case gains for one pick, plus their interpolation step.

    common_difference is the per-level step of the arithmetic sequence that
    runs from gain_none_willing (level 0) to gain_all_willing (level
    pending count); it is 0 when nothing is pending.
    """

    gain_none_willing: float
    gain_all_willing: float
    common_difference: float

    @classmethod
    def from_gains(cls, gain_none_willing, gain_all_willing, pending_count):
        step = 0.0
        if pending_count > 0:
            step = (gain_all_willing - gain_none_willing) / pending_count
        return cls(float(gain_none_willing), float(gain_all_willing), step)


def compute_reward_terms(graph, state, action, est):
    """Evaluate both extreme-case gains for taking action in state.

    Uses exactly four influence evaluations, batched so that Monte Carlo
    estimators draw a single coin matrix shared by all four (each
    difference, and the two differences against each other, are paired).

    Args:
        graph: Graph.
        state: EnvState before the pick.
        action: node to pick; must be feasible.
        est: InfluenceEstimator.

    Returns:
        RewardTerms.
    """
    action = int(action)
    if action not in state.feasible:
        raise ValueError(f"action {action} not in the feasible set")
    willing = state.willing_support()
    pending = state.pending_support()
    base_lo = willing
    base_hi = sorted(set(willing) | set(pending))
    vals = est.influence_batch(graph, [
        base_lo,
        sorted(base_lo + [action]),
        base_hi,
        sorted(base_hi + [action]),
    ])
    return RewardTerms.from_gains(vals[1] - vals[0], vals[3] - vals[2],
                                  len(pending))


def surrogate_reward(terms, willing_prob):
    """Two-point blend of the extreme-case gains."""
    q = willing_prob
    return (1.0 - q) * terms.gain_none_willing + q * terms.gain_all_willing


def exact_expected_reward(graph, state, action, willing_prob, est):
    """Expected influence gain of a pick over all willingness outcomes.

    Enumerates every subset of the pending nodes, weights it by
    realization probability, and evaluates the pick's gain on top of
    willing + subset. Requires an exact-mode estimator (a sampled version
    would bury the quantity this serves as ground truth for) and refuses
    more than MAX_EXACT_PENDING pending nodes, since the enumeration doubles
    with each one.
    """
    if est.mode != "exact":
        raise ValueError("exact_expected_reward needs an exact-mode estimator")
    action = int(action)
    if action not in state.feasible:
        raise ValueError(f"action {action} not in the feasible set")
    pending = state.pending_support()
    if len(pending) > MAX_EXACT_PENDING:
        raise ValueError(
            f"{len(pending)} pending nodes means 2^{len(pending)} outcomes; "
            f"the limit is {MAX_EXACT_PENDING}"
        )
    willing = state.willing_support()
    q = willing_prob
    total = 0.0
    for mask in range(1 << len(pending)):
        subset = [pending[i] for i in range(len(pending)) if mask >> i & 1]
        base = sorted(set(willing) | set(subset))
        lo, hi = est.influence_batch(graph, [base, sorted(base + [action])])
        weight = (q ** len(subset)) * ((1.0 - q) ** (len(pending) - len(subset)))
        total += weight * (hi - lo)
    return total


def gap_cases(terms, willing_prob, slot):
    """Unclamped worst-case gap terms for the two extremal adversaries.

    slot counts the picks of the round up to and including this one, so
    slot - 1 nodes were pending. The first case drives every intermediate
    outcome to the all-willing gain, the second to the none-willing gain.
    """
    if slot < 1:
        raise ValueError("slot must be >= 1")
    q = willing_prob
    spread = terms.gain_none_willing - terms.gain_all_willing
    case_high = (q - (1.0 - q) ** (slot - 1)) * spread
    case_low = (1.0 - q - q ** (slot - 1)) * spread
    return case_high, case_low


def gap_bound(terms, willing_prob, slot):
    """Upper bound on |surrogate - exact expected reward| for this pick."""
    case_high, case_low = gap_cases(terms, willing_prob, slot)
    return max(case_high, case_low, 0.0)


def evaluation_count_audit(kind, slot):
    """Influence evaluations needed for one pick at the given slot.

    kind 'surrogate' is flat (the two extreme differences); kind 'exact'
    pays two evaluations for each of the 2^(slot-1) willingness outcomes.
    """
    if slot < 1:
        raise ValueError("slot must be >= 1")
    if kind == "surrogate":
        return 4
    if kind == "exact":
        return 2 ** slot
    raise ValueError(f"unknown audit kind {kind!r}")
