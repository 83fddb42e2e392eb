"""Exception types raised across the package."""


class AbstractionError(Exception):
    """Base class for every error raised by ckabs."""


class PastUnavailable(AbstractionError):
    """Past outputs were requested from a system without an inverse map."""


class LengthMismatch(AbstractionError, ValueError):
    pass


class NoMatch(AbstractionError):
    """A trace lies in no block of the partition."""


class MultiMatch(AbstractionError):
    """A trace lies in more than one block of the partition."""


class EmptyBlock(AbstractionError):
    """Some words were observed too rarely to estimate their block."""

    def __init__(self, words):
        self.words = list(words)
        names = ", ".join(str(w) for w in self.words)
        super().__init__(f"unobserved blocks (count <= zero_threshold): {names}")


class TooLarge(AbstractionError):
    pass


class AlphabetMismatch(AbstractionError, ValueError):
    pass


class PastWordUnsupported(AbstractionError):
    pass


class DegenerateAlphabet(AbstractionError):
    pass
