"""Exact incidence of translated circle sets, level sets of piecewise-linear
functions, and the moduli of continuity they control."""
from .circle_set import (
    Arc,
    CircleOpenSet,
    InvalidInputError,
    kh_deficit,
    measure,
    normalize,
    tau,
    tau_sup,
    translate,
)
from .constructions import (
    FatCantorSpec,
    fat_cantor_complement,
    pierpont,
    random_open_set,
    random_pl_function,
    tent_train,
    terekhin,
)
from .gauge import GaugeFunction, LengthFamily, bt_index, gauge_sum, jensen_bound, validate_phi
from .pl_function import (
    IndicatrixProfile,
    PLFunction,
    banach_integral,
    indicatrix_profile,
    modulus,
    modulus_at,
    p_variation,
    superlevel_set,
    total_variation,
)

__version__ = "0.1.0"
