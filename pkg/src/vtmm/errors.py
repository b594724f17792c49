"""Exception types shared across the workbench.

Exit-code policy for the CLI lives in cli.py; here we only distinguish the
three broad families: bad user input (validation), broken files or storage
(I/O), and violated internal contracts.
"""


class VtmmError(Exception):
    """Base class for all workbench errors."""


class ValidationError(VtmmError):
    """Input rejected before any work was done."""


class StorageError(VtmmError):
    """A file or project on disk is unreadable or malformed."""


class ContractError(VtmmError):
    """An internal invariant or cross-component contract was violated."""


# --- embedding ---

class UnresolvableLabel(ValidationError):
    """No ancestor of the label is present in the word-vector table."""


class EmptyText(ValidationError):
    """Text is empty after trimming."""


class MissingPrecomputedEntry(ValidationError):
    """The precomputed sentence-vector table has no entry for this text."""


# --- features ---

class EmptyFrameList(ValidationError):
    pass


class TooFewObjects(ValidationError):
    """Union of detected object labels is smaller than the requested top-k."""


# --- net ---

class DimensionMismatch(ContractError):
    pass


class StaleCache(ContractError):
    """Backward was called with activations from a different network version."""


class EmptyTrainingSet(ValidationError):
    pass


class CorruptCheckpoint(StorageError):
    pass


class VersionMismatch(StorageError):
    """Checkpoint file uses an unsupported format version."""


# --- pairs ---

class SingleClassDataset(ValidationError):
    """Negative pairs need at least two distinct class labels."""


# --- scoring ---

class NoFeatures(ValidationError):
    """A class must carry at least one annotated feature to be scored."""


class UnknownClassInVTMM(ValidationError):
    """An annotated class is absent from the baseline being corrected."""


class EmptyEvaluation(ValidationError):
    pass


# --- store ---

class CorruptProject(StorageError):
    pass


class UnknownRevision(ValidationError):
    pass


class ValidationFailed(ValidationError):
    """Annotation snapshot rejected; carries per-feature diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class ConcurrentWrite(StorageError):
    """Another writer holds the project lock."""
