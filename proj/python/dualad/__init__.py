"""Rule-based driving planners with a reasoner-supplied speed cap."""

from ._core import (
    CartesianPose,
    DualadError,
    FrenetPose,
    ReferencePath,
    arbitrate,
    cli,
    describe_lateral,
    describe_longitudinal,
    describe_orientation,
    idm_accel,
    normalize_orientation,
    parse_reply,
    render_agent,
    select_worst_k,
    simulate,
    to_cartesian,
    to_frenet,
    wrap_angle,
)

__all__ = [
    "CartesianPose",
    "DualadError",
    "FrenetPose",
    "ReferencePath",
    "arbitrate",
    "cli",
    "describe_lateral",
    "describe_longitudinal",
    "describe_orientation",
    "idm_accel",
    "normalize_orientation",
    "parse_reply",
    "render_agent",
    "select_worst_k",
    "simulate",
    "to_cartesian",
    "to_frenet",
    "wrap_angle",
]

__version__ = "0.1.0"
