"""Null electromagnetic fields from Bateman pairs, quaternionic frames and field-line topology."""

from .exprlang import Expression, ExprError, ExprSyntaxError, parse
from .fields import (
    BatemanField,
    FieldSample,
    NullTetrad,
    hopf_ranada,
    km_forms,
    null_tetrad,
    optical_scalars,
    psi_maps,
    rs_form,
    sample,
)
from .frames import FrameSide, bracket, maurer_cartan, sphere_map, zeta_map
from .jet import Jet2
from .quaternion import Quaternion, UnitQuaternion
from .topology import (
    Curve,
    GridSpec,
    TraceConfig,
    gauss_linking,
    helicity,
    hopf_circles,
    hopf_invariant,
    psi_constancy,
    trace_line,
)
from .verify import ResidualReport, run_battery

__version__ = "0.1.0"

__all__ = [
    "BatemanField",
    "Curve",
    "ExprError",
    "ExprSyntaxError",
    "Expression",
    "FieldSample",
    "FrameSide",
    "GridSpec",
    "Jet2",
    "NullTetrad",
    "Quaternion",
    "ResidualReport",
    "TraceConfig",
    "UnitQuaternion",
    "bracket",
    "gauss_linking",
    "helicity",
    "hopf_circles",
    "hopf_invariant",
    "hopf_ranada",
    "km_forms",
    "maurer_cartan",
    "null_tetrad",
    "optical_scalars",
    "parse",
    "psi_constancy",
    "psi_maps",
    "rs_form",
    "run_battery",
    "sample",
    "sphere_map",
    "trace_line",
    "zeta_map",
]
