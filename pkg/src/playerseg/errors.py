"""Domain errors raised across the pipeline.

Every error carries a stable ``code`` (its class name) so the CLI can emit a
single machine-parseable line on stderr.
"""

from __future__ import annotations


class PlayersegError(Exception):
    """Base class for all domain errors (CLI exit code 1)."""

    @property
    def code(self) -> str:
        return type(self).__name__


class MissingColumn(PlayersegError):
    def __init__(self, name: str):
        super().__init__(f"required column missing: {name!r}")
        self.name = name


class MalformedRow(PlayersegError):
    def __init__(self, line_no: int, detail: str = ""):
        msg = f"malformed row at line {line_no}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
        self.line_no = line_no


class DuplicateCell(PlayersegError):
    def __init__(self, player: str, time: str, feature: str):
        super().__init__(
            f"conflicting duplicate value for ({player!r}, {time!r}, {feature!r})"
        )
        self.player = player
        self.time = time
        self.feature = feature


class InvalidCounts(PlayersegError):
    pass


class InvalidSpec(PlayersegError):
    pass


class DegenerateColumn(PlayersegError):
    def __init__(self, column: int):
        super().__init__(f"column {column} has zero variance")
        self.column = column


class KTooLarge(PlayersegError):
    def __init__(self, k: int, n: int):
        super().__init__(f"K={k} exceeds the number of points N={n}")
        self.k = k
        self.n = n


class EmptyInput(PlayersegError):
    pass


class LengthMismatch(PlayersegError):
    pass


class EmptyCorpus(PlayersegError):
    pass


class NoEdges(PlayersegError):
    pass


class AllZeroWeights(PlayersegError):
    pass


class UnknownNode(PlayersegError):
    def __init__(self, node: str):
        super().__init__(f"node {node!r} not present in the graph")
        self.node = node


class NegativeDuration(PlayersegError):
    pass


class RankDeficient(PlayersegError):
    pass


class DimensionMismatch(PlayersegError):
    pass


class PerplexityTooLarge(PlayersegError):
    pass


class ConfigInvalid(PlayersegError):
    """Bad config file or override (CLI exit code 2)."""
