"""Exception types shared by the kernel backends."""


class LpError(RuntimeError):
    """Base class for inner-LP failures."""


class LpInfeasible(LpError):
    """The primal max c.x s.t. Ax <= b has no feasible point."""


class LpUnbounded(LpError):
    """The primal objective is unbounded above."""


class LpDegenerate(LpError):
    """Constraint gradients do not span the variable space (rank deficiency)."""
