"""Error types shared by every module.

Each error carries a stable ``name`` (the class name) so the command line
can report which case fired without parsing messages.
"""


class AdtError(Exception):
    """Base class for domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# signatures
class SignatureSyntaxError(AdtError):
    pass


class DuplicateConstructor(AdtError):
    pass


class DuplicateType(AdtError):
    pass


class EmptySignature(AdtError):
    pass


class ReservedToken(AdtError):
    pass


class UnknownType(AdtError):
    pass


class UnknownConstructor(AdtError):
    pass


class OverlappingSignatures(AdtError):
    pass


class InfiniteConstructorFamily(AdtError):
    pass


# terms
class ArityMismatch(AdtError):
    pass


class TypeMismatch(AdtError):
    pass


class UnknownToken(AdtError):
    def __init__(self, type_name, token):
        super().__init__(f"no constructor of type {type_name!r} has token {token!r}")
        self.type_name = type_name
        self.token = token


class TrailingTokens(AdtError):
    pass


class TruncatedInput(AdtError):
    pass


class NonInjectiveSpecifier(AdtError):
    pass


class UnboundVariable(AdtError):
    pass


class MissingOperation(AdtError):
    pass


class BottomUnsupported(AdtError):
    pass


# finite algebras
class AlgebraFormatError(AdtError):
    pass


class IncompleteTable(AdtError):
    pass


class PartialTableEncountered(AdtError):
    pass


class Diverged(AdtError):
    pass


class BudgetExceeded(AdtError):
    pass


# head types
class HeadFormatError(AdtError):
    pass


# posets
class PosetFormatError(AdtError):
    pass


class NotAPartialOrder(AdtError):
    pass


class NoBottom(AdtError):
    pass


class UnknownElement(AdtError):
    pass


# orders on terms
class NotNormalized(AdtError):
    pass


class NotRegular(AdtError):
    pass


# polymorphism
class DeclaredSupportInvalid(AdtError):
    pass


class WrongArgKeys(AdtError):
    pass


class PolyTypeMismatch(AdtError):
    pass


class PolyTypeSyntaxError(AdtError):
    pass


class PropagatedOracleError(AdtError):
    pass
