"""Exception types raised across the package."""


class TCSError(ValueError):
    """Base class for input and precondition errors."""

    code = "error"

    def payload(self):
        return {"error": self.code, "message": str(self)}


class DisconnectedGraph(TCSError):
    code = "disconnected_graph"


class UnknownPoint(TCSError):
    code = "unknown_point"


class DimensionMismatch(TCSError):
    code = "dimension_mismatch"


class SamePoint(TCSError):
    code = "same_point"


class NotMolecular(TCSError):
    code = "not_molecular"


class TooLarge(TCSError):
    code = "too_large"


class OrderMismatch(TCSError):
    code = "order_mismatch"


class OrderViolation(TCSError):
    code = "order_violation"


class InvalidBasis(TCSError):
    code = "invalid_basis"


class ParameterOutOfRange(TCSError):
    code = "parameter_out_of_range"


class NotConnected(TCSError):
    code = "not_connected"


class EmptyRadialNeighbourhood(TCSError):
    code = "empty_radial_neighbourhood"


class InputError(TCSError):
    """Malformed or unreadable input file."""

    code = "parse_error"
