from ._fffaa import (
    Error,
    adjust_extrusion,
    adjust_feedrate,
    critical_angle,
    gap_cost,
    interference_threshold,
    print_time,
    process,
    roundtrip,
    wedge,
)

__all__ = [
    "Error",
    "adjust_extrusion",
    "adjust_feedrate",
    "critical_angle",
    "gap_cost",
    "interference_threshold",
    "print_time",
    "process",
    "roundtrip",
    "wedge",
]
