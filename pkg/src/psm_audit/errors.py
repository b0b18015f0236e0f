"""Exception types shared across the toolkit."""


class AuditError(Exception):
    """Base class for all toolkit-specific failures."""


class EmptyInputError(AuditError):
    """An input file or dataset produced no usable entries after cleaning."""


class SplitError(AuditError):
    """A corpus cannot be split as requested (e.g. fewer than 2 unique passwords)."""


class ModelFormatError(AuditError):
    """A model file is corrupt, truncated, or written by an unsupported version."""


class ProvenanceError(AuditError):
    """A model does not match the dataset it is claimed to be trained on."""
