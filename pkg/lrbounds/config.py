import math
from enum import Enum, EnumMeta


class MetaEnum(EnumMeta):
    """Meta enumeration to make 'in' keyword work."""

    def __contains__(cls, item):
        try:
            cls(item)
        except ValueError:
            return False
        return True

    # Prints out the name of the type
    def __str__(self):
        return self.name


class Boundary(Enum, metaclass=MetaEnum):
    """Boundary conditions of a one-dimensional chain.

    Categories
    ----------
    open : str
        A chain with two ends; distances are ``|i - j|``.
    periodic : str
        A ring; distances use the minimal image ``min(|i - j|, N - |i - j|)``.
    infinite : str
        The infinite chain. Only analytic quantities are available on it.
    """

    OPEN = "open"
    PERIODIC = "periodic"
    INFINITE = "infinite"


class LambdaMode(Enum, metaclass=MetaEnum):
    """How the summed coupling constant lambda is derived.

    Categories
    ----------
    infinite-lattice : str
        ``1 + 2 zeta(alpha)``, valid for every chain length.
    finite-row-max : str
        The largest row sum of the coupling matrix of a finite chain.
    """

    INFINITE_LATTICE = "infinite-lattice"
    FINITE_ROW_MAX = "finite-row-max"


class ModelKind(Enum, metaclass=MetaEnum):
    """Spin models supported by the simulators and the dense oracle."""

    XY = "xy"
    TFIM = "tfim"


class MuMode(Enum, metaclass=MetaEnum):
    """Whether the splitting parameter mu is held fixed or optimized per point."""

    FIXED = "fixed"
    OPTIMIZED = "optimized"


class OutputFormat(Enum, metaclass=MetaEnum):
    """File formats written by the command line interface."""

    CSV = "csv"
    JSON = "json"


# exponent sentinel for nearest-neighbor couplings
NEAREST_NEIGHBOR = math.inf

# relative width of the two-sided bracket on zeta(alpha)
ZETA_REL_TOL = 1e-12

# mu optimization: coarse grid then golden-section refinement
MU_GRID_SIZE = 64
MU_GRID_BOUNDS = (0.01, 0.99)
MU_REFINE_TOL = 1e-6

# exponent above which exponentials are handled in log space
EXP_OVERFLOW_GUARD = 700.0

# causal contours are solved to this relative tolerance in t
CONTOUR_RTOL = 1e-9

DEFAULT_KRYLOV_DIM = 30
DEFAULT_KRYLOV_DT = 0.05
DEFAULT_KRYLOV_TOL = 1e-10
MAX_KRYLOV_HALVINGS = 10

DEFAULT_MAX_TFIM_SITES = 26
DEFAULT_MAX_DENSE_SITES = 12

# environment variable overriding where the command line writes its files
OUTPUT_DIR_ENV = "LRBOUNDS_OUTPUT_DIR"

# state vectors plus Krylov basis must fit in this many bytes
DEFAULT_MEMORY_BUDGET = 8 * 2**30

# signals below this are round-off of the simulators and pass any bound check
COMPLIANCE_ATOL = 1e-12
