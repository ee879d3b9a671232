"""Exception hierarchy shared by the pipeline modules."""


class SahsError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(SahsError, ValueError):
    pass


class SingleClassTrainingSet(SahsError, ValueError):
    pass


class EmptyTrainingSet(SahsError, ValueError):
    pass


# --- EDF -------------------------------------------------------------------

class EdfError(SahsError):
    pass


class TruncatedHeader(EdfError):
    pass


class NonAsciiField(EdfError):
    pass


class InconsistentHeaderBytes(EdfError):
    pass


class InvalidNumeric(EdfError):
    pass


class FieldOverflow(EdfError):
    """A header value cannot be written losslessly into its fixed-width field."""


class ChannelNotFound(EdfError, KeyError):
    pass


class AmbiguousChannel(EdfError):
    pass


class TruncatedDataRecord(EdfError):
    pass


class ValueOutOfPhysicalRange(EdfError, ValueError):
    pass


class IoFailure(SahsError, OSError):
    pass


# --- annotations -----------------------------------------------------------

class AnnotationError(SahsError):
    pass


class MalformedXml(AnnotationError):
    pass


class MissingField(AnnotationError):
    pass


class NegativeDuration(AnnotationError):
    pass


class InvalidEventTime(AnnotationError):
    pass


# --- dsp / synth / eval ----------------------------------------------------

class CutoffAboveNyquist(SahsError, ValueError):
    pass


class EventPlacementOverflow(SahsError):
    pass


class EmptySampleSet(SahsError, ValueError):
    pass


class TooFewSubjects(SahsError, ValueError):
    pass


class IncompleteGrid(SahsError, ValueError):
    pass


class ModelFormatError(SahsError):
    pass
