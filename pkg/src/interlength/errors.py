class BudgetExceeded(RuntimeError):
    """A search or rewrite ran past its configured resource cap.

    ``explored`` is how far the computation got before stopping, in the
    unit of the cap that tripped (agents, plays, steps or nodes).
    """

    def __init__(self, message: str, explored: int = 0):
        super().__init__(message)
        self.explored = explored


class OutOfHypothesis(ValueError):
    """Inputs fall outside the side conditions a bound or transformation requires."""
