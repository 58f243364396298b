"""Metrics collection for monitoring long-running votes, searches and simulations."""

import time
from functools import wraps
from typing import Optional

from prometheus_client import CollectorRegistry, Counter, Histogram, generate_latest
import structlog

logger = structlog.get_logger(__name__)

# Create a custom registry for our metrics
REGISTRY = CollectorRegistry()

SAMPLES_VOTED = Counter(
    'ensemble_samples_voted_total',
    'Samples decided by the two-stage vote',
    ['outcome'],
    registry=REGISTRY
)

CONFIGS_SCORED = Counter(
    'ensemble_configs_scored_total',
    'Ensemble configurations scored by the re-voting search',
    ['size'],
    registry=REGISTRY
)

FILES_LOADED = Counter(
    'ensemble_files_loaded_total',
    'Prediction, gold and manifest files parsed',
    ['kind'],
    registry=REGISTRY
)

VOTERS_SIMULATED = Counter(
    'ensemble_voters_simulated_total',
    'Synthetic voters generated',
    registry=REGISTRY
)

OPERATION_DURATION = Histogram(
    'ensemble_operation_duration_seconds',
    'Operation duration in seconds',
    ['operation'],
    registry=REGISTRY
)


class MetricsCollector:
    """Centralized metrics collection."""

    def record_votes(self, n_samples: int, n_overrides: int) -> None:
        """Record one ensemble prediction pass."""
        SAMPLES_VOTED.labels(outcome="override").inc(n_overrides)
        SAMPLES_VOTED.labels(outcome="majority").inc(n_samples - n_overrides)

    def record_configs_scored(self, size: int, count: int = 1) -> None:
        CONFIGS_SCORED.labels(size=str(size)).inc(count)

    def record_file_loaded(self, kind: str) -> None:
        FILES_LOADED.labels(kind=kind).inc()

    def record_voters_simulated(self, count: int) -> None:
        VOTERS_SIMULATED.inc(count)


# Global metrics collector instance
metrics = MetricsCollector()


def track_time(metric_name: Optional[str] = None):
    """Decorator to track execution time of functions."""
    def decorator(func):
        operation = metric_name or func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration = time.perf_counter() - start_time
                logger.error("operation_failed",
                             operation=operation, duration=duration, error=str(e))
                raise
            duration = time.perf_counter() - start_time
            OPERATION_DURATION.labels(operation=operation).observe(duration)
            logger.info("operation_completed",
                        operation=operation, duration=duration)
            return result

        return wrapper
    return decorator


def get_metrics() -> str:
    """Get current metrics in Prometheus format."""
    return generate_latest(REGISTRY).decode('utf-8')
