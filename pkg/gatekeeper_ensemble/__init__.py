# Makes the gatekeeper_ensemble package importable.
__version__ = "0.1.0"

__all__ = [
    "config",
    "data",
    "voting",
    "evaluation",
    "selection",
    "search",
    "analysis",
    "simulator",
    "storage",
    "reports",
    "utils",
]
