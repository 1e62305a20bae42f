"""Exception types raised by the library.

Each error carries a short machine-readable ``reason`` used by the CLI.
"""


class FormError(Exception):
    reason = "FormError"

    def to_dict(self):
        return {"error": self.reason, "message": str(self)}


class NotSymmetric(FormError):
    reason = "NotSymmetric"


class OddDiagonal(FormError):
    reason = "OddDiagonal"


class NotPositiveDefinite(FormError):
    reason = "NotPositiveDefinite"


class WrongRank(FormError):
    reason = "WrongRank"


class ParseError(FormError):
    reason = "ParseError"


class ResourceLimitExceeded(FormError):
    reason = "ResourceLimitExceeded"


class SmallLevel(FormError):
    reason = "SmallLevel"


class NonFundamentalDiscriminant(FormError):
    reason = "NonFundamentalDiscriminant"


class TailDominates(FormError):
    reason = "TailDominates"


class InvalidCharacter(FormError):
    reason = "InvalidCharacter"


class NotSquarefree(FormError):
    reason = "NotSquarefree"


class NonPositiveArgument(FormError):
    reason = "NonPositiveArgument"


class NoCoverFound(FormError):
    reason = "NoCoverFound"


class NoRegularEmbedding(FormError):
    reason = "NoRegularEmbedding"


class QueueBudgetExceeded(FormError):
    reason = "QueueBudgetExceeded"


class BudgetExceeded(FormError):
    reason = "BudgetExceeded"


class Unresolvable(FormError):
    reason = "Unresolvable"
