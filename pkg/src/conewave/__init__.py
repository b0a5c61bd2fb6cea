"""Numerical checks of the Euler-Lagrange equation for exponential candidates
in sharp Fourier extension on the cone."""

from .cone_core import ExponentConfig, make_exponents, parse_p
from .euler_lagrange import ELReport, el_report
from .specfun import DomainError
from .verdict import Verdict, decide

__all__ = ["DomainError", "ELReport", "ExponentConfig", "Verdict", "decide", "el_report",
           "make_exponents", "parse_p"]
__version__ = "0.1.0"
