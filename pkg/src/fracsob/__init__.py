"""Fractional Sobolev and grand Lebesgue moduli of continuity on grids.

Submodules: :mod:`fracsob.psi` (psi-functions, fundamental functions,
Orlicz correspondence), :mod:`fracsob.grid` (grid functions, moduli),
:mod:`fracsob.norms` (Lebesgue, grand Lebesgue and Gagliardo quantities),
:mod:`fracsob.certificates` (continuity certificates), :mod:`fracsob.fields`
(random fields and Monte Carlo) and :mod:`fracsob.cli`.
"""

from .grid import FractionalIndex, GridFunction, sample_function
from .psi import PsiFunction, YoungFunction, fundamental_function

__version__ = "0.1.0"

__all__ = ["FractionalIndex", "GridFunction", "PsiFunction", "YoungFunction",
           "fundamental_function", "sample_function", "__version__"]
