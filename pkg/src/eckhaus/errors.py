"""Exception hierarchy. Each family maps to one CLI exit code."""


class EckhausError(Exception):
    exit_code = 1


class ModelDomainError(EckhausError, ValueError):
    """Symbol evaluated outside its domain or returned a bad value."""


class ConfigError(EckhausError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class HypothesisError(EckhausError):
    """A structural assumption on the model does not hold."""


class NotAtBifurcationError(HypothesisError):
    def __init__(self, offset, k=None):
        self.offset = offset
        self.k = k
        super().__init__(f"max Re lambda = {offset:.3e} at k = {k}; not at a Turing point")


class UniquenessError(HypothesisError):
    pass


class SubcriticalError(HypothesisError):
    pass


class DegenerateResonanceError(HypothesisError):
    pass


class DegenerateAmplitudeError(HypothesisError):
    pass


class BranchTrackingError(EckhausError):
    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message)


class SolverError(EckhausError):
    exit_code = 3


class NoWaveError(SolverError):
    pass


class TruncationError(SolverError):
    pass


class SpectrumError(EckhausError):
    exit_code = 4


class CurveTrackingError(SpectrumError):
    def __init__(self, message, sigma=None):
        self.sigma = sigma
        super().__init__(message)


class GapViolationError(SpectrumError):
    pass


class RefineGridError(SpectrumError):
    pass


class VerdictRefused(SpectrumError):
    pass


class AgreementError(EckhausError):
    exit_code = 5


class DisagreementError(AgreementError):
    pass
