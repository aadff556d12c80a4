"""HFB dynamics on a momentum torus, checked against an exact Fock-space oracle."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
