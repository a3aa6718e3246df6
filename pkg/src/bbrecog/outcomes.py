"""Result type for constructions that may land on the quadric.

Joins, meets, polar projections and the field operations built from them
either succeed or stumble on a unipotent element.  The second case is not an
error: the characteristic search deliberately provokes it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Generic, Optional, TypeVar

T = TypeVar("T")


@dataclass(frozen=True)
class Ok(Generic[T]):
    value: T

    ok = True

    def unwrap(self) -> T:
        return self.value

    def map(self, fn: Callable[[T], Any]) -> "Ok":
        return Ok(fn(self.value))


@dataclass(frozen=True)
class Unipotent:
    """A product of two involutions with no common commuting involution."""

    u: Any
    witnesses: tuple

    ok = False

    def unwrap(self):
        raise UnipotentEncountered(self)

    def map(self, fn) -> "Unipotent":
        return self


class UnipotentEncountered(Exception):
    """Raised by ``unwrap`` on a Unipotent outcome; carries the outcome."""

    def __init__(self, outcome: Unipotent):
        super().__init__("construction hit a unipotent element")
        self.outcome = outcome


SerendipityOutcome = Any  # Ok[T] | Unipotent


def first_unipotent(*outcomes) -> Optional[Unipotent]:
    for out in outcomes:
        if not out.ok:
            return out
    return None
