"""Seeded synthetic gold sets and correlated voter pools."""

from ..storage.pool_store import write_pool
from .config import SimConfig, SimVoter, prior_from_counts, uniform_confusion, voters_with_accuracy
from .engine import SimulatedPool, simulate, stream

__all__ = [
    "SimConfig",
    "SimVoter",
    "SimulatedPool",
    "prior_from_counts",
    "simulate",
    "stream",
    "uniform_confusion",
    "voters_with_accuracy",
    "write_pool",
]
