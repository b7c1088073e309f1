"""Missing-premise multi-turn environment: parsing, rewards, episodes, metrics and dataset building."""

from ._gril import (
    ContractError,
    EmptyInputError,
    Episode,
    ShortfallError,
    ValidationError,
    build_dataset,
    check_answer,
    classify_action,
    default_uncertainty_lexicon,
    detection_classification,
    evaluate,
    extract_final_answer,
    forced_feedback_report,
    gap_ratio,
    mask_problem,
    normalize_answer,
    parse_response,
    segment_sentences,
    trajectory_reward,
)


def rollout(problem, policy, overrides=None):
    """Run one episode, calling policy(messages) for each assistant turn. Returns the trajectory."""
    episode = Episode(problem, overrides)
    while not episode.done:
        episode.step(policy(episode.messages))
    return episode.trajectory()


__all__ = [
    "ContractError",
    "EmptyInputError",
    "Episode",
    "ShortfallError",
    "ValidationError",
    "build_dataset",
    "check_answer",
    "classify_action",
    "default_uncertainty_lexicon",
    "detection_classification",
    "evaluate",
    "extract_final_answer",
    "forced_feedback_report",
    "gap_ratio",
    "mask_problem",
    "normalize_answer",
    "parse_response",
    "rollout",
    "segment_sentences",
    "trajectory_reward",
]
