from src.planning.errors import ParseError, PlanningError, ProblemError, ResolutionError
from src.planning.models import (
    DurationBound,
    DurativeAction,
    Plan,
    PlanningProblem,
    PlanStep,
    SnapAction,
    SnapKind,
    StateSequence,
    TimedSnap,
)

__all__ = [
    'DurationBound', 'DurativeAction', 'ParseError', 'Plan', 'PlanningError', 'PlanningProblem',
    'PlanStep', 'ProblemError', 'ResolutionError', 'SnapAction', 'SnapKind', 'StateSequence', 'TimedSnap',
]
