"""Accelerated primal-dual solvers for smooth strongly convex problems under Kx = b."""

from ._affineopt import *  # noqa: F401,F403
from ._affineopt import __doc__  # noqa: F401

__version__ = "0.1.0"
