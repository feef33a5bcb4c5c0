"""loopsurf: constant-mean-curvature surfaces from loop-group factorization."""

from . import errors
from .loops import (
    DEFAULT_TRUNC,
    CirclePoint,
    TwistedLoop,
    eval_loop,
    exp_axis,
    identity_loop,
    inverse,
    make_loop,
    mul,
    star,
    theta_derivative,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TRUNC",
    "CirclePoint",
    "TwistedLoop",
    "errors",
    "eval_loop",
    "exp_axis",
    "identity_loop",
    "inverse",
    "make_loop",
    "mul",
    "star",
    "theta_derivative",
]
