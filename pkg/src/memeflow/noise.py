"""Seeded Gaussian noise with a fixed, documented generator.

Uniform doubles come from the PCG64 bit generator seeded through numpy's
``SeedSequence(seed)``; each double is ``(next_uint64 >> 11) * 2**-53``.
Pairs of uniforms ``(u1, u2)`` become normals via the Box-Muller transform::

    r = sqrt(-2 ln(1 - u1));  z1 = r cos(2 pi u2);  z2 = r sin(2 pi u2)

Both stages are plain arithmetic on a published generator, so the stream is
reproducible outside numpy as well.
"""
import numpy as np


def gaussian(seed: int, n: int, sigma: float = 1.0) -> np.ndarray:
    """``n`` normal deviates with standard deviation ``sigma``."""
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    m = (n + 1) // 2
    u = rng.random(2 * m)
    u1, u2 = u[0::2], u[1::2]
    r = np.sqrt(-2.0 * np.log1p(-u1))
    z = np.empty(2 * m)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return sigma * z[:n]
