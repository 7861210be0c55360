"""Resource budgets shared by the resultant and Gröbner routines."""

from __future__ import annotations

import time
from dataclasses import dataclass, field


class BudgetExceeded(RuntimeError):
    """A computation ran past its configured budget.

    Attributes
    ----------
    reason : str
        Which limit was hit (``"terms"``, ``"degree"``, ``"steps"`` or ``"seconds"``).
    partial : object
        Whatever work was completed before aborting (may be ``None``).
    """

    def __init__(self, reason: str, message: str, partial=None):
        super().__init__(message)
        self.reason = reason
        self.partial = partial


@dataclass
class Budget:
    """Caps on intermediate size and running time.

    ``max_terms`` bounds the size of a dense interpolation box or of any single
    polynomial produced; ``max_degree`` bounds a priori total-degree estimates;
    ``max_steps`` bounds S-polynomial reductions in Buchberger; ``seconds`` is
    a wall-clock allowance measured from :meth:`start`.
    """

    max_terms: int = 1_000_000
    max_degree: int = 64
    max_steps: int = 20_000
    seconds: float | None = None
    _deadline: float | None = field(default=None, repr=False, compare=False)

    def start(self) -> Budget:
        """Return a copy whose clock starts now."""
        deadline = None if self.seconds is None else time.monotonic() + self.seconds
        return Budget(self.max_terms, self.max_degree, self.max_steps, self.seconds, deadline)

    def check_time(self, partial=None) -> None:
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise BudgetExceeded("seconds", f"wall-clock budget of {self.seconds:g}s exhausted", partial)

    def check_terms(self, count: int, what: str = "polynomial", partial=None) -> None:
        if count > self.max_terms:
            raise BudgetExceeded("terms", f"{what} needs {count} terms, cap is {self.max_terms}", partial)

    def check_degree(self, degree: int, what: str = "polynomial", partial=None) -> None:
        if degree > self.max_degree:
            raise BudgetExceeded(
                "degree", f"{what} has degree bound {degree}, cap is {self.max_degree}", partial
            )


UNLIMITED = Budget(max_terms=10**12, max_degree=10**6, max_steps=10**12, seconds=None)
