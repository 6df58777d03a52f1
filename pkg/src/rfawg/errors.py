"""Exception hierarchy shared by all simulator modules.

ValidationError covers bad configuration or precondition violations
(CLI exit code 2); AnalysisError covers failures that arise while
processing otherwise valid inputs (CLI exit code 3).
"""


class AwgError(Exception):
    pass


class ValidationError(AwgError):
    pass


class AnalysisError(AwgError):
    pass


# pattern memory / sequencer
class CapacityExceeded(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class InvalidLoop(ValidationError):
    pass


# DAC rendering
class NonMonotonicEdges(AnalysisError):
    pass


# clock chain
class InvalidConfig(ValidationError):
    pass


class InvalidDivisor(ValidationError):
    pass


# pulse compiler
class InvalidProgram(ValidationError):
    pass


class ProgramTooLong(ValidationError):
    pass


class AliasedCarrier(ValidationError):
    pass


# equalizer
class ZeroSeed(ValidationError):
    pass


class SingularSystem(AnalysisError):
    pass


# metrology
class NonCoherentTone(AnalysisError):
    pass


class OutOfBandProduct(AnalysisError):
    pass


class DegenerateTable(AnalysisError):
    pass


class InsufficientSamples(AnalysisError):
    pass


class OutOfModelRange(ValidationError):
    pass
