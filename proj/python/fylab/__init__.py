"""Python bindings for the fylab core library."""

from ._fylab import *  # noqa: F401,F403
from ._fylab import FylabError, __doc__  # noqa: F401
