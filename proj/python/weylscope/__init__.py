"""Curvature of Riemannian 4-metrics on coordinate charts."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
