"""
Exception hierarchy shared by every SetForge module.

Each error exposes ``name`` (the class name), which is what the CLI prints on a
domain failure and what protocol outcomes record.
"""


class SetForgeError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self):
        return type(self).__name__


# numtheory
class NumberTheoryError(SetForgeError):
    pass


class ZeroModulus(NumberTheoryError):
    pass


class NotInvertible(NumberTheoryError):
    pass


# wire formats
class MalformedMessage(SetForgeError):
    """A length-prefixed wire message could not be parsed."""


# rsa
class RsaError(SetForgeError):
    pass


class BadParameters(RsaError):
    pass


class MessageTooLarge(RsaError):
    pass


class MalformedCiphertext(RsaError):
    """Ciphertext has a bad length or decodes to an invalid block.

    Raised by both the RSA block scheme and the CBC mode.
    """


class AuthenticationFailed(RsaError):
    pass


class KeyFileError(SetForgeError):
    pass


# blockcipher
class BlockCipherError(SetForgeError):
    pass


class PaddingError(BlockCipherError):
    pass


# pki
class CertificateError(SetForgeError):
    pass


class FieldError(CertificateError):
    pass


class FieldTooLong(FieldError):
    pass


class EmptyField(FieldError):
    pass


class CertificateFormatError(CertificateError, MalformedMessage):
    pass


# envelope
class EnvelopeError(SetForgeError):
    pass


class WrongRecipient(EnvelopeError):
    pass


class SignatureInvalid(EnvelopeError):
    pass


class MalformedEnvelope(EnvelopeError, MalformedMessage):
    pass


# channel
class ChannelError(SetForgeError):
    pass


class BadPolicy(ChannelError):
    pass


class NoCommonStrength(ChannelError):
    pass


class CertificateRejected(ChannelError):
    pass


class HandshakeFailed(ChannelError):
    pass


class MacFailure(ChannelError):
    pass


class ReplayOrReorder(ChannelError):
    pass


class BadLength(ChannelError):
    pass


# setflow
class SetProtocolError(SetForgeError):
    pass


class DuplicateName(SetProtocolError):
    pass


class InvalidOrder(SetProtocolError):
    pass


class AmountMismatch(SetProtocolError):
    pass


class OrderIdMismatch(SetProtocolError):
    pass


class DuplicateOrder(SetProtocolError):
    pass


class CardUnknown(SetProtocolError):
    pass


class MalformedCard(SetProtocolError):
    pass


class InsufficientFunds(SetProtocolError):
    pass


class AmountDisagreement(SetProtocolError):
    pass


class DuplicateAuthorization(SetProtocolError):
    pass


class CardExpired(SetProtocolError):
    pass


class UnexpectedResponse(SetProtocolError):
    pass


# cracker
class CrackerError(SetForgeError):
    pass


class IndexOutOfRange(CrackerError):
    pass


class NotFound(CrackerError):
    pass


class BadRate(CrackerError):
    pass


class KeySpaceTooLarge(CrackerError):
    pass
