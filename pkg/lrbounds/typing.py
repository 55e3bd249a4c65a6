from typing import Sequence, Union

import numpy as np

# Index of a lattice site. Sites are labeled 0, ..., N - 1 on finite chains
# and by any integer on the infinite chain.
Site = int

# Power-law exponent of the couplings. ``math.inf`` denotes the
# nearest-neighbor limit.
Alpha = float

# Times at which dynamics are evaluated, sorted ascending.
TimeGrid = Union[Sequence[float], np.ndarray]
