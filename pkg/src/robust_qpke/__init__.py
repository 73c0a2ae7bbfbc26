"""Exact simulation of quantum public-key encryption robust to key tampering.

Submodules:

``bits``        fixed-length GF(2) vectors
``qsim``        sparse and dense pure-state simulation
``primitives``  seeded random streams, toy one-way function, PRF, Toeplitz hash
``ots``         Lamport one-time signatures
``qpke``        everlasting and computational one-bit schemes
``qkd``         two-message key distribution
``adversary``   tampering channels, security games and key search
``transcript``  wire frames and record files
``harness``     experiment runner behind the ``robust-qpke`` command
"""

from .bits import BitString
from .errors import ABORT, BLOCKED, REJECT, Bottom, FormatError, RobustQpkeError
from .primitives import RngStream
from .qkd import QkdParams, qkd_decode, qkd_first, qkd_second, run_session
from .qpke import (
    QpkeParams, comp_dec, comp_enc, comp_pkgen, comp_skgen, ev_dec, ev_enc, ev_pkgen, ev_skgen,
    multibit_dec, multibit_enc,
)
from .qsim import SparseState

__version__ = "0.1.0"

__all__ = [
    "ABORT", "BLOCKED", "REJECT", "BitString", "Bottom", "FormatError", "QkdParams",
    "QpkeParams", "RngStream", "RobustQpkeError", "SparseState", "comp_dec", "comp_enc",
    "comp_pkgen", "comp_skgen", "ev_dec", "ev_enc", "ev_pkgen", "ev_skgen", "multibit_dec",
    "multibit_enc", "qkd_decode", "qkd_first", "qkd_second", "run_session", "__version__",
]
