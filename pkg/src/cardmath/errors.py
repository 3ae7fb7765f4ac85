"""Exception hierarchy shared by all cardmath modules."""


class CardMathError(Exception):
    """Base class for every error raised by this package."""


# --- facade ---------------------------------------------------------------

class ZeroModulus(CardMathError):
    """Modular exponentiation requested with a modulus below 2."""


class OperandTooLarge(CardMathError):
    """Operand not reduced, or wider than the facade supports."""


class InvalidCurve(CardMathError):
    """Curve parameters fail validation."""


class ScalarOutOfRange(CardMathError):
    """Scalar outside [1, n-1]."""


class PointNotOnCurve(CardMathError):
    """Supplied point does not satisfy the curve equation."""


class InfinityResult(CardMathError):
    """An operation produced the point at infinity where a finite point is required."""


class InvalidKey(CardMathError):
    """Key record unusable for the requested operation."""


class MalformedSignature(CardMathError):
    """Signature record is structurally invalid."""


# --- bignum ---------------------------------------------------------------

class Overflow(CardMathError):
    """Result does not fit the available capacity."""


class NegativeResult(CardMathError):
    """Unsigned subtraction with minuend smaller than subtrahend."""


class EvenModulus(CardMathError):
    """Modular multiplication requires an odd modulus."""


class NotPrimeModulus(CardMathError):
    """Operation requires a context flagged as prime."""


class ZeroOperand(CardMathError):
    """Zero has no modular inverse."""


class NonResidue(CardMathError):
    """Value is not a quadratic residue of the modulus."""


class DivideByZero(CardMathError):
    """Division or modulo by zero."""


# --- ec -------------------------------------------------------------------

class CurveMismatch(CardMathError):
    """Points belong to different curves."""


class NotOnCurve(CardMathError):
    """No curve point exists with the given x-coordinate."""


# --- mempool --------------------------------------------------------------

class TransientBudgetExceeded(CardMathError):
    """Pool spec requests more transient bytes than the card provides."""


class PoolExhausted(CardMathError):
    """No free pool object of the requested size in any segment."""


class DoubleUnlock(CardMathError):
    """Unlock of an object that is already free."""


class UnknownHandle(CardMathError):
    """Handle does not name any object of this pool."""


# --- profiler -------------------------------------------------------------

class DuplicateTrapId(CardMathError):
    """Two traps of one routine share an id."""


class UnknownTrap(CardMathError):
    """Stop trap id is not declared for the routine."""


class RoutineError(CardMathError):
    """Profiled routine failed before reaching the stop trap."""


class MissingLocation(CardMathError):
    """A reported trap has no source location to annotate."""


# --- cli ------------------------------------------------------------------

class UnknownTarget(CardMathError):
    """Requested profiling target is not registered."""


class ConfigError(CardMathError):
    """Run configuration is invalid (maps to exit code 2)."""
