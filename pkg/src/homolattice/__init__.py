"""Homological product codes over GF(2) and fault-tolerant partial-decode gates."""

from . import chain_complex, circuit, codes, ftgate, gf2, hprod
from .chain_complex import ChainComplex, CssCode, boundary_from_css, canonical_form, css_from_boundary
from .hprod import ProductCode, homological_product

__all__ = [
    "ChainComplex",
    "CssCode",
    "ProductCode",
    "boundary_from_css",
    "canonical_form",
    "chain_complex",
    "circuit",
    "codes",
    "css_from_boundary",
    "ftgate",
    "gf2",
    "homological_product",
    "hprod",
]

__version__ = "0.1.0"
