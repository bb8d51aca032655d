"""memeflow: meme aggregation dynamics.

Constituent energy sums, bounded logistic amplitude growth and its
curvature, parameter estimation, bubble detection, Lotka-Volterra
competition between memes, and entropy triage of dataset columns.
"""
from .bubble import BubbleConfig, BubbleVerdict, classify, detect_inflection, stability_check
from .competition import (
    CompetitionSystem,
    competition_rhs,
    integrate_competition,
    interior_equilibrium,
    normalize,
)
from .dynamics import (
    EnergyContext,
    LogisticParams,
    StageSpec,
    check_context,
    exponential_solution,
    integrate,
    logistic_closed_form,
    logistic_curvature,
    logistic_rhs,
    run_stages,
)
from .energy import Constituent, ConstituentSet, EnergyLevels, activation_energy, delta_energy
from .features import Dataset, FeatureScore, column_entropy, triage
from .fitting import FitReport, fit_exponential, fit_logistic, goodness
from .series import TimeSeries

__version__ = "0.1.0"
