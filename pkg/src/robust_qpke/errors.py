"""Exception types and the distinguished "bottom" values used by the protocols."""


class RobustQpkeError(Exception):
    """Base class for every error raised by this package."""


class EqualBasisStrings(RobustQpkeError, ValueError):
    pass


class IndexOutOfRange(RobustQpkeError, IndexError):
    pass


class UnsupportedTermCount(RobustQpkeError, ValueError):
    pass


class TooManyQubits(RobustQpkeError, ValueError):
    pass


class LengthMismatch(RobustQpkeError, ValueError):
    pass


class CoinLengthMismatch(LengthMismatch):
    pass


class DimensionMismatch(RobustQpkeError, ValueError):
    pass


class AbortCiphertext(RobustQpkeError):
    """Decryption was asked to open the aborted ciphertext."""


class SupportMismatch(RobustQpkeError):
    """A quantum ciphertext has weight outside the two honest basis strings."""


class LabelMismatch(RobustQpkeError, ValueError):
    pass


class InsufficientCounts(RobustQpkeError, ValueError):
    pass


class FormatError(RobustQpkeError, ValueError):
    """A transcript, frame or serialized value could not be parsed.

    ``position`` names where parsing stopped (a frame index or line number).
    """

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = f"{position}: {message}"
        super().__init__(message)


class Bottom:
    """A named failure symbol. Instances compare by identity only."""

    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name

    def __bool__(self):
        return False


#: Encryption aborted because the public-key register failed verification.
ABORT = Bottom("ABORT")
#: A QKD party rejected the session.
REJECT = Bottom("REJECT")
#: The adversary dropped the second protocol message.
BLOCKED = Bottom("BLOCKED")
