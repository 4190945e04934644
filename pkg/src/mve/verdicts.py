"""Verdict objects and the constants they quote.

A verdict is the end product of the certification pipeline: either the
group's minimal volume entropy vanishes, or it is bounded below by an
explicit constant, or we say so honestly when neither is established.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

VANISHING = "Vanishing"
NON_VANISHING = "NonVanishing"
NON_VANISHING_HEURISTIC = "NonVanishingHeuristic"
UNKNOWN = "Unknown"
UNSUPPORTED = "Unsupported"

_STATUSES = (
    VANISHING,
    NON_VANISHING,
    NON_VANISHING_HEURISTIC,
    UNKNOWN,
    UNSUPPORTED,
)

# Dimension-2 constant of the finiteness argument for non-collapsing
# aspherical complexes; both lower bounds below are uniform-growth
# rates divided by a multiple of this.
FNCA_DIM2_CONSTANT = 10**6

#: Uniform exponential growth rate used for one-ended 2-dimensional
#: right-angled Artin groups: log 3.
RAAG_UNIFORM_GROWTH = math.log(3.0)

#: Uniform exponential growth rate used for exponentially growing
#: free-by-cyclic groups: (1/6) log 3.
FBZ_UNIFORM_GROWTH = math.log(3.0) / 6.0

#: Explicit bound: log(3) / (2 * 10^6).
RAAG_NONVANISHING_BOUND = math.log(3.0) / (2 * FNCA_DIM2_CONSTANT)

#: Explicit bound: log(3) / (12 * 10^6).
FBZ_NONVANISHING_BOUND = math.log(3.0) / (12 * FNCA_DIM2_CONSTANT)

THEOREM_FBZ = "Theorem 1.1"
THEOREM_RAAG = "Theorem 1.2"
THEOREM_SHAPE = "Theorem 1.3"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a vanishing / non-vanishing decision.

    ``status`` is one of the module-level status strings.  A positive
    ``lower_bound`` is only meaningful for the two non-vanishing
    statuses; vanishing verdicts carry 0.0.  ``certificate`` holds
    whatever finite data justifies the answer (a cycle, a power and
    conjugator, a growth profile, ...) and is JSON-serializable.
    """

    status: str
    lower_bound: float
    certificate: dict[str, Any] = field(default_factory=dict)
    theorem: str = ""
    note: str = ""

    def __post_init__(self) -> None:
        if self.status not in _STATUSES:
            raise ValueError(f"unknown verdict status: {self.status!r}")
        if self.status in (NON_VANISHING, NON_VANISHING_HEURISTIC):
            if not self.lower_bound > 0.0:
                raise ValueError("non-vanishing verdict requires a positive lower bound")
        elif self.status == VANISHING:
            if self.lower_bound != 0.0:
                raise ValueError("vanishing verdict must carry lower bound 0.0")

    def to_json(self) -> dict[str, Any]:
        cert = dict(self.certificate)
        if self.note:
            cert["note"] = self.note
        return {
            "status": self.status,
            "lower_bound": self.lower_bound,
            "certificate": cert,
            "paper_theorem": self.theorem,
        }
