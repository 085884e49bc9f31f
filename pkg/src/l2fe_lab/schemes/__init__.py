"""The three protection schemes behind one Gen/Rep/Verify surface."""

from ..errors import UnsupportedScheme
from ..hashing import keyed_hash, verify_exact
from .base import ProtectedRecord, Scheme, authenticate_payload
from .facialfe import FacialFeParams, FacialFeRecord, FacialFeScheme, facialfe_gen, facialfe_rep
from .l2fe import L2feParams, L2feRecord, L2feScheme, centered_lift, l2fe_gen, l2fe_rep, default_params
from .mrp import MrpParams, MrpRecord, MrpScheme, jl_min_dimension, mrp_gen, mrp_rep, mrp_verify

SCHEME_CLASSES = {"mrp": MrpScheme, "facialfe": FacialFeScheme, "l2fe": L2feScheme}


def scheme_from_dict(name: str, params: dict):
    try:
        cls = SCHEME_CLASSES[name]
    except KeyError:
        raise UnsupportedScheme(f"unknown scheme {name!r}") from None
    return cls.from_dict(params)


__all__ = [
    "FacialFeParams",
    "FacialFeRecord",
    "FacialFeScheme",
    "L2feParams",
    "L2feRecord",
    "L2feScheme",
    "MrpParams",
    "MrpRecord",
    "MrpScheme",
    "ProtectedRecord",
    "SCHEME_CLASSES",
    "Scheme",
    "authenticate_payload",
    "centered_lift",
    "facialfe_gen",
    "facialfe_rep",
    "jl_min_dimension",
    "keyed_hash",
    "l2fe_gen",
    "l2fe_rep",
    "mrp_gen",
    "mrp_rep",
    "mrp_verify",
    "default_params",
    "scheme_from_dict",
    "verify_exact",
]
