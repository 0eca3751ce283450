"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Degenerate or inconsistent geometry (zero-area triangle, node off the
    interface line, non-monotone surface parameters)."""


class TopologyError(ValueError):
    """Connectivity is broken (disconnected tagged edge set, dangling edges)."""


class ContactSearchError(RuntimeError):
    """Slave and master surfaces do not overlap as required (empty overlap,
    or master side does not cover the slave side)."""


class ConfigurationError(ValueError):
    """Unsupported problem setup (constraining a slave-surface DOF, a node
    appearing in two contact surfaces, mismatched solver/method pairing)."""


class SingularPivotError(ArithmeticError):
    """A tridiagonal pivot fell below tolerance; the surface mass matrix is
    effectively singular, which indicates broken input."""


class PreconditionerError(ValueError):
    """Preconditioner cannot be constructed for the given matrix (zero
    diagonal for SSOR, singular diagonal block for block Jacobi)."""
