"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside its admissible range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class InfeasibleCorrelationError(DomainError):
    """The requested (mu, rho) pair yields a negative joint-probability cell."""


class NoTransmissionError(ValueError):
    """No event with a receiving switch on and a transmitter on has positive mass."""


class ConstraintError(ValueError):
    """A power allocation violates its average-power budget."""

    def __init__(self, user: int, slack: float):
        self.user = user
        self.slack = slack
        super().__init__(f"user {user} exceeds its power budget by {-slack:.3g}")


class BracketError(RuntimeError):
    """A root-finding bracket does not enclose a sign change."""
