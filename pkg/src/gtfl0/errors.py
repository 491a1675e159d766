"""Exception types raised across the package."""


class GTFError(Exception):
    """Base class for all package errors."""


class GraphError(GTFError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DisconnectedGraph(GraphError):
    def __init__(self, n_components: int):
        super().__init__(f"graph is disconnected ({n_components} components)")
        self.n_components = n_components


class ProbabilityOutOfRange(GraphError):
    pass


class DegenerateFeatures(GraphError):
    pass


class DimensionMismatch(GTFError, ValueError):
    pass


class EmptyCluster(GTFError, ValueError):
    def __init__(self, cluster: int):
        super().__init__(f"cluster {cluster} has no members")
        self.cluster = cluster


class LabelOutOfRange(GTFError, ValueError):
    pass


class NonSymmetric(GTFError, ValueError):
    pass


class ConvergenceFailure(GTFError, RuntimeError):
    pass


class KEqualsN(GTFError, ValueError):
    pass


class TooFewPoints(GTFError, ValueError):
    pass


class SingularSystem(GTFError, ValueError):
    pass


class TooLarge(GTFError, ValueError):
    pass


class ZeroSignal(GTFError, ValueError):
    pass


class DegenerateTruth(GTFError, ValueError):
    pass


class ConfigError(GTFError, ValueError):
    pass


class DataNotFound(GTFError, FileNotFoundError):
    pass
