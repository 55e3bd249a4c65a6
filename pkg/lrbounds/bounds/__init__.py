from .bounds import *  # noqa: F403
from .hopseries import *  # noqa: F403
