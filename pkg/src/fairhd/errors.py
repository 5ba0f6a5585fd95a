"""Exception hierarchy shared by all fairhd modules."""


class FairHDError(Exception):
    """Base class for all fairhd errors."""


class InvalidDimensionError(FairHDError):
    """Hypervector dimensions are zero, negative, or mismatched."""


class DegenerateSimilarityError(FairHDError):
    """Cosine similarity requested against an all-zero vector."""


class SchemaError(FairHDError):
    """Dataset columns or feature shapes do not match the declared schema."""


class ParseError(SchemaError):
    """A cell in the node table could not be parsed; message carries row/column."""


class GraphIntegrityError(FairHDError):
    """Edge endpoints out of range or otherwise inconsistent graph structure."""


class SplitError(FairHDError):
    """A train/test split left some class without training nodes."""


class MissingClassError(FairHDError):
    """A class has no training nodes, so its class hypervector is undefined."""


class EmptyEvaluationError(FairHDError):
    """An evaluation mask selects no nodes."""


class UndefinedMetricError(FairHDError):
    """A fairness metric's conditional probability is undefined on this input."""


class SyntheticSpecError(FairHDError):
    """Synthetic graph specification is degenerate or out of range."""
