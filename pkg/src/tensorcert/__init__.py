"""Exact tensor rank and border-rank certificates.

Submodules:

* :mod:`tensorcert.exactfield` - rationals, prime fields, Q(sqrt D), polynomials in eps
* :mod:`tensorcert.tensorcore` - dense tensors, products, named families
* :mod:`tensorcert.transform` - restrictions, degenerations, interpolation
* :mod:`tensorcert.bounds` - flattening, substitution and brute-force rank bounds
* :mod:`tensorcert.pencil` - Kronecker canonical form and the pencil rank formula
* :mod:`tensorcert.cli` - command line front end
"""

from .exactfield import EpsPoly, FieldSpec, Poly, QuadraticNumber
from .tensorcore import Decomposition, SimpleTensor, Tensor

__all__ = ["EpsPoly", "FieldSpec", "Poly", "QuadraticNumber", "Decomposition", "SimpleTensor", "Tensor"]
__version__ = "0.1.0"
