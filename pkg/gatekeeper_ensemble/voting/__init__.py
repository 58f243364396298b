"""Majority voting, the two-stage gatekeeper rule and full-pool prediction."""

from .ensemble import (
    EnsembleOutput,
    PredictionMatrix,
    VoteOutcome,
    VoteTrace,
    decide,
    ensemble_predict,
    tally_matrix,
    vote_matrix,
)
from .tally import VoteTally, gatekeeper_vote, majority_vote

__all__ = [
    "EnsembleOutput",
    "PredictionMatrix",
    "VoteOutcome",
    "VoteTally",
    "VoteTrace",
    "decide",
    "ensemble_predict",
    "gatekeeper_vote",
    "majority_vote",
    "tally_matrix",
    "vote_matrix",
]
