"""Exception hierarchy shared by all simulator modules.

Each class maps to one CLI exit code, so failures stay distinguishable
end to end: validation -> 2, capacity -> 3, verification -> 4.
"""


class MbqcError(Exception):
    """Base class for all package errors."""


class ValidationError(MbqcError):
    """Malformed input: bad graph, out-of-range index, broken invariant."""


class CapacityError(MbqcError):
    """Requested size exceeds a configured cap (qubits, branches, spins)."""


class ContradictionError(MbqcError):
    """A forced measurement outcome has (near-)zero probability."""


class VerificationError(MbqcError):
    """A self-check that should hold by construction failed."""
