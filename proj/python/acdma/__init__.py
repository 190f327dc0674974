"""Large-system moments and multistage detector SINR for asynchronous CDMA."""

from ._acdma import *  # noqa: F401,F403
from ._acdma import __doc__  # noqa: F401
