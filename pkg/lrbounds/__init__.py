from ._version import __version__  # noqa: F401
from .lattice import CouplingModel, Lambda, coupling, distance, lambda_constant
from .bounds import *  # noqa: F403
from .dynamics import *  # noqa: F403
from .export import ResultGrid, check_bounds
