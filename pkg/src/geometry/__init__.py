"""Connections, the holomorphic Koszul pipeline and the twisted real-analytic pipeline."""

from .verdict import Verdict
from .connections import Connection, FormMatrix, Superconnection

__all__ = [
    'Verdict',
    'Connection',
    'FormMatrix',
    'Superconnection',
]
