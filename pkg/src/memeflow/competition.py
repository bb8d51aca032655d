"""Competing memes: Lotka-Volterra competition dynamics.

Row ``i`` of ``alpha`` holds the effects of every meme ``j`` on meme ``i``.
In raw form each meme has its own amplitude ``delta_e[i]``::

    dy_i/dt = (A_i / dE_i) * y_i * (dE_i - sum_j alpha_ij y_j)

Dividing row ``i`` of ``alpha`` by ``dE_i`` gives the normalized form::

    dy_i/dt = A_i * y_i * (1 - sum_j alpha'_ij y_j)

which has identical solutions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from ._rk4 import rk4_step, time_grid
from .errors import SingularMatrix, StepUnstable, ValidationError
from .series import TimeSeries

CLAMP_TOL = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class CompetitionSystem:
    affinities: np.ndarray
    delta_es: np.ndarray
    alpha: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        a = np.asarray(self.affinities, dtype=float).reshape(-1)
        d = np.asarray(self.delta_es, dtype=float).reshape(-1)
        m = np.asarray(self.alpha, dtype=float)
        n = a.size
        if n == 0:
            raise ValidationError("system needs at least one meme")
        if d.size != n:
            raise ValidationError(f"delta_es has {d.size} entries, affinities has {n}")
        if m.ndim != 2 or m.shape[0] != n:
            raise ValidationError(f"alpha must be {n}x{n}, got shape {m.shape}")
        for i, row in enumerate(m):
            if row.size != n:
                raise ValidationError(f"alpha row {i} has {row.size} entries, expected {n}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(d)) and np.all(np.isfinite(m))):
            raise ValidationError("system contains non-finite values")
        if not self.normalized:
            bad = np.nonzero(d <= 0)[0]
            if bad.size:
                raise ValidationError(f"delta_es must be > 0; offending indices {bad.tolist()}")
        object.__setattr__(self, "affinities", a)
        object.__setattr__(self, "delta_es", d)
        object.__setattr__(self, "alpha", m)

    @property
    def n(self):
        return self.affinities.size

    def to_dict(self):
        return {
            "affinities": self.affinities.tolist(),
            "delta_es": self.delta_es.tolist(),
            "alpha": self.alpha.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            alpha = data["alpha"]
            affinities = data["affinities"]
            delta_es = data["delta_es"]
        except KeyError as exc:
            raise ValidationError(f"system description missing key {exc.args[0]!r}") from None
        if not isinstance(alpha, list) or any(not isinstance(r, list) for r in alpha):
            raise ValidationError("alpha must be a list of rows")
        n = len(affinities)
        if len(alpha) != n:
            raise ValidationError(f"alpha has {len(alpha)} rows, expected {n}")
        for i, row in enumerate(alpha):
            if len(row) != n:
                raise ValidationError(f"alpha row {i} has {len(row)} entries, expected {n}")
        return cls(affinities, delta_es, np.array(alpha, dtype=float))


def load_system(path) -> CompetitionSystem:
    with open(path, encoding="utf-8") as fh:
        return CompetitionSystem.from_dict(json.load(fh))


def normalize(sys: CompetitionSystem) -> CompetitionSystem:
    """Absorb each meme's amplitude into its row of the interaction matrix."""
    if sys.normalized:
        raise ValidationError("system is already normalized")
    d = sys.delta_es
    if np.any(d <= 0):
        raise ValidationError("delta_es must be > 0 to normalize")
    return replace(sys, alpha=sys.alpha / d[:, None], delta_es=np.ones_like(d), normalized=True)


def carrying_capacities(sys: CompetitionSystem) -> np.ndarray:
    """Single-meme equilibria ``1 / alpha'_ii`` of a normalized system."""
    if not sys.normalized:
        raise ValidationError("carrying_capacities needs a normalized system")
    with np.errstate(divide="ignore"):
        return 1.0 / np.diag(sys.alpha)


def _check_state(y, sys):
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != sys.n:
        raise ValidationError(f"state has {y.size} components, system has {sys.n} memes")
    return y


def competition_rhs(y, sys: CompetitionSystem):
    """Right-hand side of the competition system (either form)."""
    y = _check_state(y, sys)
    if sys.normalized:
        return sys.affinities * y * (1.0 - sys.alpha @ y)
    d = sys.delta_es
    return (sys.affinities / d) * y * (d - sys.alpha @ y)


def integrate_competition(sys: CompetitionSystem, y0, t_end: float, step: float):
    """RK4 trajectories of all memes on a shared grid, one TimeSeries each.

    Undershoots below zero no larger than ``CLAMP_TOL`` are clamped; anything
    larger, or a non-finite state, raises StepUnstable.
    """
    y = _check_state(y0, sys).copy()
    neg = np.nonzero(y < 0)[0]
    if neg.size:
        raise ValidationError(f"initial state must be >= 0; offending indices {neg.tolist()}")
    if not (t_end > 0 and step > 0):
        raise ValidationError("t_end and step must be > 0")
    if step > t_end:
        raise ValidationError(f"step {step!r} exceeds t_end {t_end!r}")
    t = time_grid(t_end, step)
    out = np.empty((t.size, sys.n))
    out[0] = y
    f = lambda v: competition_rhs(v, sys)  # noqa: E731
    for k in range(1, t.size):
        y = rk4_step(f, y, t[k] - t[k - 1])
        if not np.all(np.isfinite(y)):
            raise StepUnstable(f"non-finite state at t={t[k]!r}; reduce step")
        low = y < 0
        if np.any(low):
            if np.any(y[low] < -CLAMP_TOL):
                idx = np.nonzero(y < -CLAMP_TOL)[0].tolist()
                raise StepUnstable(f"components {idx} went negative at t={t[k]!r}; reduce step")
            y[low] = 0.0
        out[k] = y
    return [TimeSeries(t, out[:, i]) for i in range(sys.n)]


def interior_equilibrium(sys: CompetitionSystem):
    """Strictly positive fixed point solving ``alpha y = 1``, or None.

    Existence only; stability is left to :func:`equilibrium_eigenvalues` or
    simulation.
    """
    if not sys.normalized:
        raise ValidationError("interior_equilibrium needs a normalized system")
    m = sys.alpha
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrix(f"interaction matrix is numerically singular (condition {cond:.3g})")
    ones = np.ones(sys.n)
    y = np.linalg.solve(m, ones)
    # one round of iterative refinement
    y = y + np.linalg.solve(m, ones - m @ y)
    residual = float(np.max(np.abs(m @ y - ones)))
    if residual >= 1e-10:
        raise SingularMatrix(f"equilibrium residual {residual:.3g} too large")
    if np.all(y > 0):
        return y
    return None


def jacobian(y, sys: CompetitionSystem) -> np.ndarray:
    """Jacobian of the normalized right-hand side at state ``y``."""
    if not sys.normalized:
        raise ValidationError("jacobian needs a normalized system")
    y = _check_state(y, sys)
    a = sys.affinities
    J = -(a * y)[:, None] * sys.alpha
    J[np.diag_indices(sys.n)] += a * (1.0 - sys.alpha @ y)
    return J


def equilibrium_eigenvalues(sys: CompetitionSystem):
    """Eigenvalues of the Jacobian at the interior equilibrium, or None if absent."""
    y = interior_equilibrium(sys)
    if y is None:
        return None
    return np.linalg.eigvals(jacobian(y, sys))
