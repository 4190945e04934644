"""Exception types shared across the package.

Everything raised on bad user input or an unusable computation state
derives from :class:`MveError`, so callers can catch one type at the
boundary (the CLI maps it to exit code 1).
"""


class MveError(Exception):
    """Base class for all errors raised by this package."""


class IndexOutOfRange(MveError):
    """A letter index is zero or exceeds the ambient rank."""


class InvalidInverse(MveError):
    """Claimed inverse data does not compose to the identity."""


class UnknownVertex(MveError):
    """A vertex label or id is not present in the graph."""


class TrivialInput(MveError):
    """An argument that must be nontrivial reduced to the identity."""


class InvalidGraph(MveError):
    """A graph object violates its structural contract."""


class InvalidSplitting(MveError):
    """Splitting data is not a spanning tree plus loop edges."""


class InvalidGluData(MveError):
    """Integer data does not fit the given splitting."""


class RankMismatch(MveError):
    """An automorphism's rank disagrees with companion data."""


class TubularizationInconsistent(MveError):
    """Internal check of a constructed decomposition failed."""


class NotCollapsible(MveError):
    """Neither edge injection of the requested edge is an isomorphism."""


class NotATree(MveError):
    """The provided edge set is not a spanning tree."""


class InvalidGraphOfGroups(MveError):
    """Graph-of-groups data violates its structural contract."""


class NotCoreGraph(MveError):
    """The metric graph has an empty core after pruning."""


class DegenerateRank(MveError):
    """The graph's fundamental group is cyclic or trivial."""


class DegenerateProfile(MveError):
    """A growth profile is too flat to estimate rates from."""


class ResourceLimit(MveError):
    """An enumeration exceeded its configured frontier cap."""
