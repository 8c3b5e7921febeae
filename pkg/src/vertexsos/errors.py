"""Exception hierarchy.

Every error carries the process exit code the CLI maps it to:

====  ==========================================
code  meaning
====  ==========================================
1     I/O failure while writing outputs
2     configuration / schema problem
3     dimension mismatch or size guard exceeded
4     singular or degenerate numerical input
5     iterative solver did not converge
====  ==========================================
"""


class VertexSOSError(Exception):
    exit_code = 1


class OutputError(VertexSOSError):
    exit_code = 1

    def __init__(self, path, reason):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")


class SchemaError(VertexSOSError):
    exit_code = 2

    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = ".".join(str(p) for p in self.path)
        super().__init__(f"{where}: {message}" if where else message)


class UnknownKey(SchemaError):
    def __init__(self, key, path=()):
        self.key = key
        super().__init__(f"unknown key {key!r}", path)


class DimensionError(VertexSOSError):
    exit_code = 3


class GuardExceeded(DimensionError):
    pass


class PatchTooLarge(GuardExceeded):
    pass


class MissingGenerator(DimensionError):
    pass


class UnclassifiablePattern(DimensionError):
    pass


class DegenerateError(VertexSOSError):
    exit_code = 4


class SingularMatrix(DegenerateError):
    pass


class SingularDenominator(SingularMatrix):
    pass


class DegenerateWeights(DegenerateError):
    pass


class ZeroPartitionFunction(DegenerateError):
    pass


class RootOfUnity(DegenerateError):
    pass


class ZeroC1(DegenerateError):
    pass


class ZeroDenominator(DegenerateError):
    pass


class ZeroComponent(DegenerateError):
    pass


class RankDeficient(DegenerateError):
    def __init__(self, message, block=None):
        self.block = block
        super().__init__(message)


class NonConvergence(VertexSOSError):
    exit_code = 5

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)
