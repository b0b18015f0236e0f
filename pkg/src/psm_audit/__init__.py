"""Audit toolkit for data-driven password strength meters.

Trains list/Markov/PCFG-style password models, converts probabilities to
guess numbers, quantifies over-learning, mounts membership-inference and
trained-password stealing attacks, and simulates meter-aware targeted
guessing against leaked blocklists or training sets.
"""

__version__ = "0.1.0"

from .errors import (
    AuditError,
    EmptyInputError,
    ModelFormatError,
    ProvenanceError,
    SplitError,
)

__all__ = [
    "AuditError",
    "EmptyInputError",
    "ModelFormatError",
    "ProvenanceError",
    "SplitError",
    "__version__",
]
