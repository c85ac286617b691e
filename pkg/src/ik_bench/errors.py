"""Exception types shared across the package."""


class ParseError(ValueError):
    """Input document is malformed (bad JSON, missing keys, wrong types)."""


class ValidationError(ValueError):
    """Input parsed but violates a model invariant."""


class SolverError(RuntimeError):
    """QP solve failed to produce a usable iterate."""


class TrackingError(RuntimeError):
    """Closed-loop tracking aborted; carries the failing step index."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step
