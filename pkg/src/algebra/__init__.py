"""Algebra kernel: truncated series, forms, exterior algebra operators and the graded solver."""

from .ring import IdealSpec, RingSpec, TruncatedSeries
from .forms import Form
from .superlinear import BundleSpec, DualMultivector, EndMatrix, Multivector

__all__ = [
    'IdealSpec',
    'RingSpec',
    'TruncatedSeries',
    'Form',
    'BundleSpec',
    'DualMultivector',
    'EndMatrix',
    'Multivector',
]
