"""Exception hierarchy.

Every library error derives from :class:`BetaTakagiError` and carries a short
machine-readable ``code`` used by the CLI when it reports failures.
"""


class BetaTakagiError(Exception):
    code = "error"
    exit_code = 1

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class DomainError(BetaTakagiError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""

    code = "domain_error"
    exit_code = 3


class InadmissibleDigits(DomainError):
    """A user-supplied digit list is not a greedy expansion."""

    code = "inadmissible_digits"


class InsufficientPrecision(BetaTakagiError):
    """The working precision does not cover the requested depth."""

    code = "insufficient_precision"
    exit_code = 4

    def __init__(self, required: int, available: int, what: str = "") -> None:
        self.required = required
        self.available = available
        msg = f"need precision_bits >= {required}, have {available}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(required_bits=self.required, available_bits=self.available)
        return d


class AmbiguousBranch(BetaTakagiError):
    """An enclosure straddles the branch point 1/beta; the digit is undecided."""

    code = "ambiguous_branch"
    exit_code = 5

    def __init__(self, index: int, trace=None) -> None:
        self.index = index
        self.trace = trace
        super().__init__(f"branch of the beta-map undecidable at step {index}; raise precision")

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["ambiguous_at"] = self.index
        return d


class SampleBudgetExceeded(BetaTakagiError):
    code = "sample_budget_exceeded"
    exit_code = 6


class SeparationNotFound(BetaTakagiError):
    """Two points share all greedy digits up to the depth examined."""

    code = "separation_not_found"
    exit_code = 7


class NotEnoughOnes(BetaTakagiError):
    code = "not_enough_ones"
    exit_code = 7


class EmptySample(BetaTakagiError, ValueError):
    code = "empty_sample"
    exit_code = 7


class InvariantViolation(BetaTakagiError, AssertionError):
    """A certified inequality that must hold was found violated."""

    code = "invariant_violation"
    exit_code = 8
