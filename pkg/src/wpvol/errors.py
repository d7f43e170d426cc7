"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an operation is called outside its mathematical domain
    (unstable indices, negative lengths, invalid parameter windows, ...)."""


class NumericsError(RuntimeError):
    """Raised when a numerical routine cannot meet its stated tolerance
    (quadrature non-convergence, dual-path disagreement, aliasing, ...)."""


class CacheError(RuntimeError):
    """Raised on cache corruption (checksum mismatch, bad header) or when a
    key would be overwritten with a different value."""


class PrecisionExhausted(RuntimeError):
    """Raised when interval refinement hits the hard precision cap without
    separating two values (pathological near-tie or equal inputs that were
    not detected symbolically)."""
