from src.automata.errors import AutomataError, NetworkError, TransitionError
from src.automata.models import (
    Automaton,
    ClockConstraint,
    Configuration,
    DelayStep,
    InternalStep,
    Network,
    Rel,
    Run,
    Transition,
    Update,
    VarDecl,
)

__all__ = [
    'AutomataError', 'Automaton', 'ClockConstraint', 'Configuration', 'DelayStep', 'InternalStep',
    'Network', 'NetworkError', 'Rel', 'Run', 'Transition', 'TransitionError', 'Update', 'VarDecl',
]
