"""Python surface for the klan C++ core.

The compiled extension carries the actual implementations; this package
just re-exports them under a stable name.
"""

from ._klan import *  # noqa: F401,F403
from ._klan import __version__  # noqa: F401
