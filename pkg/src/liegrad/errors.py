"""Exception hierarchy.

Each family maps onto one CLI exit code (see ``liegrad.cli``).
"""


class LiegradError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ParseError(LiegradError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None, position=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"position {position}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.position = position


class DimensionMismatch(LiegradError, ValueError):
    """Operands act on different numbers of qubits or have incompatible shapes."""

    exit_code = 2


class StructuralError(LiegradError):
    exit_code = 3


class SubgroupBlowup(StructuralError):
    def __init__(self, rank, max_size):
        super().__init__(
            f"subgroup blow-up: generated subgroup has rank {rank} "
            f"({2 ** rank - 1} non-identity elements) > max_size={max_size}"
        )
        self.rank = rank
        self.max_size = max_size


class DLABlowup(StructuralError):
    def __init__(self, dim, max_dim):
        super().__init__(f"DLA blow-up: dimension reached {dim} > max_dim={max_dim}")
        self.dim = dim
        self.max_dim = max_dim


class ResourceError(StructuralError):
    """Dense simulation requested beyond the configured qubit limit."""


class NumericalError(LiegradError, ArithmeticError):
    exit_code = 4


class ContractError(LiegradError, ValueError):
    """A documented precondition (Hermiticity, tracelessness, ...) was violated."""

    exit_code = 4


class MissingHadamardValue(LiegradError, KeyError):
    exit_code = 4

    def __str__(self):
        return Exception.__str__(self)
