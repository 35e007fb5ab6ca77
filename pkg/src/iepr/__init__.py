"""Bare and normal-mode Hamiltonian parameters of superconducting circuits
from inductive-energy participation ratios."""

__version__ = "0.1.0"

from .circuit import BareParameters, CircuitSpec, CouplingSpec, ElementSpec, build_bare  # noqa: E402
from .extract import ExtractionReport, extract_all  # noqa: E402
from .modal import NormalModeSet, TransformMatrix, forward_synthesize  # noqa: E402
from .nonlinear import NonlinearParameters, normal_parameters  # noqa: E402

__all__ = [
    "BareParameters",
    "CircuitSpec",
    "CouplingSpec",
    "ElementSpec",
    "ExtractionReport",
    "NonlinearParameters",
    "NormalModeSet",
    "TransformMatrix",
    "build_bare",
    "extract_all",
    "forward_synthesize",
    "normal_parameters",
]
