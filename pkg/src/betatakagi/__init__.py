"""Greedy beta-expansions, the Parry measure and generalized Takagi functions."""

__version__ = "0.1.0"

from .beta_dynamics import BetaParam, GreedyDigits, digits_of, point, random_point, synthesize
from .enclosure import Enclosure
from .invariant_measure import build_density, digit_frequency, interval_measure
from .takagi import evaluate, g_def, g_lemma1, takagi_classical

__all__ = [
    "BetaParam",
    "Enclosure",
    "GreedyDigits",
    "build_density",
    "digit_frequency",
    "digits_of",
    "evaluate",
    "g_def",
    "g_lemma1",
    "interval_measure",
    "point",
    "random_point",
    "synthesize",
    "takagi_classical",
]
