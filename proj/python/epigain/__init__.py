"""Information gains, optimal surprise and expected free energy under a
Gaussian generative model with a uniform likelihood floor.

The numerical work happens in the compiled ``_core`` extension; this package
re-exports it and adds a couple of conveniences.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__, gain_curve, run_sweep, SweepSpec, parse_range


def linspace(lo, hi, points):
    """Evenly spaced values including both ends, without needing numpy."""
    if points < 2:
        return [float(lo)]
    step = (hi - lo) / (points - 1)
    return [lo + i * step for i in range(points)]


def sweep(s_l="1:50:5", s_p="1:50:5", epsilon=1e-3, workers=0):
    """Run a sweep from ``min:max:step`` strings, like the command line."""
    spec = SweepSpec()
    spec.s_l = parse_range(s_l)
    spec.s_p = parse_range(s_p)
    spec.epsilon = epsilon
    spec.workers = workers
    return run_sweep(spec)
