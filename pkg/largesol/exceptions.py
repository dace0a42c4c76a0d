import typing


class LargesolError(Exception):
    pass


class DomainError(LargesolError, ValueError):
    pass


class ConfigurationError(LargesolError):
    pass


class NumericFailure(LargesolError):
    def __init__(self, message: str, partial: typing.Any = None) -> None:
        super().__init__(message)
        self.partial = partial


class StructuralError(LargesolError):
    def __init__(
        self,
        message: str,
        interval: typing.Optional[typing.Tuple[float, float]] = None,
        witness: typing.Any = None,
    ) -> None:
        super().__init__(message)
        self.interval = interval
        self.witness = witness


class PreconditionRejected(LargesolError):
    def __init__(
        self, hypothesis: str, verdict: str, reason: str, theorem: str
    ) -> None:
        super().__init__(f"{hypothesis}: {reason}")
        self.hypothesis = hypothesis
        self.verdict = verdict
        self.reason = reason
        self.theorem = theorem

    def as_dict(self) -> typing.Dict[str, str]:
        return {
            "hypothesis": self.hypothesis,
            "verdict": self.verdict,
            "reason": self.reason,
            "theorem": self.theorem,
        }


class SolverDefect(LargesolError):
    pass


class Infeasible(LargesolError):
    pass


class NonConvergence(LargesolError):
    def __init__(self, message: str, history: typing.Sequence[float] = ()) -> None:
        super().__init__(message)
        self.history = list(history)
