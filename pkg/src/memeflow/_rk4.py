"""Classic fixed-step fourth-order Runge-Kutta for autonomous systems."""
import numpy as np


def rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def time_grid(t_end, step):
    """Grid ``0, step, 2*step, ...`` ending exactly at ``t_end``.

    The last interval is shortened when ``t_end`` is not a multiple of ``step``.
    """
    n = int(np.ceil(t_end / step - 1e-9))
    t = np.arange(n + 1, dtype=float) * step
    t[-1] = t_end
    return t
