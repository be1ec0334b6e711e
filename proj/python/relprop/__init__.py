"""Relational propositionalization toolkit.

Everything lives in the compiled extension; this package just re-exports it.
"""

from relprop._core import *  # noqa: F401,F403
from relprop._core import __doc__  # noqa: F401
