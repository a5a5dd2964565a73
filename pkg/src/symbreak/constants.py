from typing import Literal

import numpy as np
from numpy.typing import NDArray

type ComplexArray = NDArray[np.complex128]
type RealArray = NDArray[np.float64]
type Eigenvalue = float | complex

GradingKind = Literal["continuous", "discrete"]
OperatorMode = Literal["transition", "full_s"]
TranslationKind = Literal[
    "regular_to_regular",
    "outgoing_to_regular",
    "outgoing_to_outgoing",
]
SymmetryName = Literal["rotation", "mirror", "generator"]

COMPARISON_TOLERANCE = 1e-10
GROUPING_TOLERANCE = 1e-9
UNITARITY_TOLERANCE = 1e-10
UNIMODULAR_TOLERANCE = 1e-12
SERIES_TOLERANCE = 1e-12
SERIES_MAX_TOTAL_ORDER = 24
B_ZERO_TOLERANCE = 1e-14
M_ZERO_TOLERANCE = 1e-12
CONDITION_LIMIT = 1e12
CONVERGENCE_TOLERANCE = 1e-6
DEFAULT_SEED = 20180523

# 17 significant digits round-trips every double exactly.
FLOAT_FORMAT = ".16e"

MAX_BESSEL_ORDER = 200
MAX_BESSEL_ARGUMENT = 1e4

LOCAL_ORDER_MARGIN = 8
GLOBAL_ORDER_MARGIN = 10
