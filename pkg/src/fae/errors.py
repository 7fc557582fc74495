"""Exception types raised by the estimation library."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DegenerateNuError(ArithmeticError):
    """The memorized shift angle has ``|sin(nu)|`` too small for sine recovery.

    The analysis places ``nu`` well inside ``[3pi/8, 3pi/4]``, so this only fires
    when a first-stage confidence interval already missed the true angle.
    """

    def __init__(self, nu: float, j: int | None = None) -> None:
        self.nu = nu
        self.j = j
        where = "" if j is None else f" at iteration {j}"
        super().__init__(f"degenerate shift angle nu={nu!r}{where}: |sin(nu)| < 0.1")
