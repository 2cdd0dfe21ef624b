"""Exception hierarchy shared by all wheelodom modules."""


class WheelOdomError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(WheelOdomError, ValueError):
    """An input violates a documented invariant."""


class EmptyInputError(ValidationError):
    pass


class StepTooLargeError(ValidationError):
    """A single integration step exceeds the per-step sanity bound."""

    def __init__(self, d_left, d_right, bound, index=None):
        self.d_left = d_left
        self.d_right = d_right
        self.bound = bound
        self.index = index
        where = "" if index is None else f" at step {index}"
        super().__init__(
            f"wheel travel{where} exceeds sanity bound {bound} m: "
            f"d_left={d_left!r}, d_right={d_right!r}"
        )


class FitDegenerateError(WheelOdomError):
    """Points do not determine a circle (too few, or collinear)."""


class IllegalTransitionError(WheelOdomError):
    """Both quadrature channels changed between two consecutive samples."""

    def __init__(self, prev, nxt, index=None):
        self.prev = prev
        self.next = nxt
        self.index = index
        where = "" if index is None else f" at sample {index}"
        super().__init__(
            f"illegal quadrature transition{where}: "
            f"{prev[0]}{prev[1]} -> {nxt[0]}{nxt[1]}"
        )


class AliasingError(ValidationError):
    """Quadrature oversampling too low to represent every edge legally."""


class ParseError(WheelOdomError):
    """Malformed file content. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
