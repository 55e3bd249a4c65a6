from .fits import *  # noqa: F403
from .krylov import *  # noqa: F403
from .oracle import *  # noqa: F403
from .tfim import *  # noqa: F403
from .xy import *  # noqa: F403
