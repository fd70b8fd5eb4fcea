"""Learning-rate schedules as small picklable callables.

Plain functions or lambdas would do for in-process use, but schedules
cross process boundaries when replicas run in a worker pool, and they
round-trip through config files, so they are frozen dataclasses with a
parseable text form.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ConstantRate:
    """eta(t) = value."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"learning rate must be > 0, got {self.value}")

    def __call__(self, t: int) -> float:
        return self.value

    def spec(self) -> str:
        return f"const:{self.value!r}"


@dataclass(frozen=True)
class InverseTimeRate:
    """eta(t) = num / (coef * (t + offset))."""

    num: float
    coef: float
    offset: float

    def __post_init__(self):
        if self.num <= 0 or self.coef <= 0 or self.offset <= 0:
            raise ValueError("num, coef and offset must all be > 0")

    def __call__(self, t: int) -> float:
        return self.num / (self.coef * (t + self.offset))

    def spec(self) -> str:
        return f"decay:{self.num!r},{self.coef!r},{self.offset!r}"


def parse_rate(text: str) -> ConstantRate | InverseTimeRate:
    """Parse ``const:V`` or ``decay:NUM,COEF,OFFSET`` into a schedule."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "const":
            return ConstantRate(float(rest))
        if kind == "decay":
            num, coef, offset = (float(p) for p in rest.split(","))
            return InverseTimeRate(num, coef, offset)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"malformed rate spec {text!r}: {exc}") from None
    raise ValueError(f"unknown rate kind {kind!r}; expected 'const' or 'decay'")
