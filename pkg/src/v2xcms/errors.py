"""Exception hierarchy shared across the package."""


class V2XError(Exception):
    """Base class for every error raised by v2xcms."""


# codec
class DecodeError(V2XError):
    pass


class Truncated(DecodeError):
    pass


class TrailingBytes(DecodeError):
    pass


class UnknownEnum(DecodeError):
    pass


class MalformedPoint(DecodeError):
    pass


# crypto
class TagMismatch(V2XError):
    pass


class OutOfRange(V2XError, ValueError):
    pass


# certificates and messages
class IssuerExpired(V2XError):
    pass


class WrongCertType(V2XError):
    pass


class KeyCertMismatch(V2XError):
    pass


# protocol flows
class FlowError(V2XError):
    """A protocol actor rejected an inbound message."""


class UnregisteredCanonicalKey(FlowError):
    pass


class BadRequestSignature(FlowError):
    pass


class BadInnerPoP(FlowError):
    pass


class BadPoP(FlowError):
    pass


class ValidationRejected(FlowError):
    pass


class EnrollmentChainInvalid(FlowError):
    pass


class DownloadBeforeAck(FlowError):
    pass


class UnknownSubscriber(FlowError):
    pass


class BadAuthResponse(FlowError):
    pass


class ChannelAuthFailure(FlowError):
    pass


class BadResponse(FlowError):
    """A response failed verification on the requesting side."""


# benchmarks
class UnknownTarget(V2XError, ValueError):
    pass


class MissingPkiState(V2XError):
    pass
