from .couplings import *  # noqa: F403
