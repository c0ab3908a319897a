"""Oscillating solutions of a Gronwall-type blow-up inequality and lower-bound envelopes.

Submodules:

* ``function_core`` - piecewise C^1 functions, grids, continuity audit
* ``oscillator`` - the oscillating profile X = M Y and its quadratic bridges
* ``reparam`` - tau <-> t change of variables and the blow-up time
* ``extremal`` - equality case of the transformed inequality, in log space
* ``envelope`` - lower-bound envelopes and exponent bookkeeping
* ``verifier`` - residual reports and the oscillation certificate
* ``cli`` - command-line front end
"""

__version__ = "0.1.0"

from .function_core import (  # noqa: E402
    DomainError,
    GridFunction,
    PiecewiseC1Function,
    continuity_audit,
    eval_derivative,
)
from .oscillator import OscillatorConfig, build_oscillator, hermite_data, solve_spline  # noqa: E402
from .reparam import ReparamResult, blowup_time, inverse_time_map, pushforward, time_map  # noqa: E402
from .verifier import oscillation_certificate, residual_original, residual_transformed  # noqa: E402

__all__ = [
    "DomainError",
    "GridFunction",
    "OscillatorConfig",
    "PiecewiseC1Function",
    "ReparamResult",
    "blowup_time",
    "build_oscillator",
    "continuity_audit",
    "eval_derivative",
    "hermite_data",
    "inverse_time_map",
    "oscillation_certificate",
    "pushforward",
    "residual_original",
    "residual_transformed",
    "solve_spline",
    "time_map",
]
