class GluedTreesError(Exception):
    """Base class for package errors."""


class ResourceBudgetError(GluedTreesError):
    """A requested computation exceeds a configured memory or enumeration budget."""


class BoundDomainError(GluedTreesError, ValueError):
    """A bound was evaluated outside its domain (e.g. t >= 2**n)."""


class ConfigError(GluedTreesError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
