"""Report models and their table / structured emitters."""

from .render import emit_report, parse_report, render_table, structured
from .schemas import (
    AgreementReport,
    BranchSelection,
    BudgetReport,
    CorrelationReport,
    FoldSelectionReport,
    SimulationReport,
    VoteReport,
)

__all__ = [
    "AgreementReport",
    "BranchSelection",
    "BudgetReport",
    "CorrelationReport",
    "FoldSelectionReport",
    "SimulationReport",
    "VoteReport",
    "emit_report",
    "parse_report",
    "render_table",
    "structured",
]
