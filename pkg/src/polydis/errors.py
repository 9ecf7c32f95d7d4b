"""Exception types shared across the package."""


class PolydisError(Exception):
    """Base class for all package errors."""


class OutOfRange(PolydisError):
    def __init__(self, pair, n):
        super().__init__(f"chord {pair} out of range for an {n}-gon")
        self.pair = pair


class DuplicateChord(PolydisError):
    def __init__(self, pair):
        super().__init__(f"duplicate chord {pair}")
        self.pair = pair


class CrossingChords(PolydisError):
    def __init__(self, pair_a, pair_b):
        super().__init__(f"chords {pair_a} and {pair_b} cross")
        self.pair = (pair_a, pair_b)


class NotOuterEdge(PolydisError):
    pass


class RootEdgeGlue(PolydisError):
    pass


class OracleLimitExceeded(PolydisError):
    pass


class CapExceeded(PolydisError):
    pass


class NonConvergence(PolydisError):
    pass


class NewtonDiverged(PolydisError):
    pass


class NoSingularityInRange(PolydisError):
    pass


class DegenerateKernel(PolydisError):
    pass


class DerivativeUnstable(PolydisError):
    def __init__(self, message, stencil=None):
        super().__init__(message)
        self.stencil = stencil


class SubcriticalityViolated(PolydisError):
    pass


class MismatchAt(PolydisError):
    def __init__(self, n, detail):
        super().__init__(f"mismatch at n={n}: {detail}")
        self.n = n
        self.detail = detail
