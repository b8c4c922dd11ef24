"""Symbolic F-method toolkit: Weyl algebra, algebraic Fourier transform,
singular vectors of generalized Verma modules and the covariant differential
operators they produce."""

__version__ = "0.1.0"

from .coeff import ParamContext, RatFunc, context
from .geometries import GeometrySpec, build_geometry, dpi_hat, dpi_z
from .modforms import QSeries, eisenstein, rc_bracket, rc_symbol
from .orthopoly import gegenbauer, inflate, jacobi, ode_residual
from .singular import (
    closed_form,
    emit_operator,
    ode_of_geometry,
    reconstruct_vector_valued,
    saturate,
    solve_singular,
    verify_intertwining,
    weight_space_basis,
)
from .weyl import Poly, WeylOp, fourier_hat, symbol, symbol_inverse

__all__ = [
    "GeometrySpec", "ParamContext", "Poly", "QSeries", "RatFunc", "WeylOp",
    "build_geometry", "closed_form", "context", "dpi_hat", "dpi_z", "eisenstein",
    "emit_operator", "fourier_hat", "gegenbauer", "inflate", "jacobi",
    "ode_of_geometry", "ode_residual", "rc_bracket", "rc_symbol",
    "reconstruct_vector_valued", "saturate", "solve_singular", "symbol",
    "symbol_inverse", "verify_intertwining", "weight_space_basis",
]
