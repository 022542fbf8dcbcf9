"""Snapshot/edge-list parsing, tensor assembly, and synthetic data generation.

CSV contracts are deliberately plain (RFC-4180, header row); numeric cells
that fail to parse are recorded as missing and zero-filled at tensor
assembly rather than failing the row.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateCell,
    EmptyInput,
    InvalidCounts,
    InvalidSpec,
    MalformedRow,
    MissingColumn,
)

log = logging.getLogger(__name__)

# The ten temporally-scored behavior attributes plus the six static profile
# attributes recognized by the ingest schema.
TEMPORAL_FEATURES = [
    "carteam_leader_num",
    "chicken_rate",
    "diamond_add_1week",
    "mode_choice_ratio",
    "is_comeback",
    "avg_damage",
    "recruit_num",
    "is_register",
    "friend_num_plat",
    "avg_healtimes",
]
STATIC_FEATURES = [
    "segment",
    "level",
    "online_time",
    "avg_survival_time",
    "intimate_friend_num",
    "diamond_add_1week",
]
RAW_COUNTERS = ["funny_mode_games", "total_games"]


@dataclass
class PlayerSnapshot:
    """One player's attribute record at one time point.

    ``attributes`` maps attribute name to value; a missing entry means the
    value was absent or unparseable in the source row.
    """

    player_id: str
    time_point: str
    attributes: dict[str, float] = field(default_factory=dict)


@dataclass
class TimeSeriesTensor:
    """N players x T time points x d features, zero-filled where sparse."""

    player_ids: list[str]
    time_points: list[str]
    feature_names: list[str]
    values: np.ndarray  # (N, T, d) float64

    def __post_init__(self):
        n, t, d = len(self.player_ids), len(self.time_points), len(self.feature_names)
        if self.values.shape != (n, t, d):
            raise InvalidSpec(
                f"tensor shape {self.values.shape} inconsistent with index lists "
                f"({n}, {t}, {d})"
            )

    @property
    def n_players(self) -> int:
        return len(self.player_ids)

    @property
    def n_timepoints(self) -> int:
        return len(self.time_points)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def matrix_at(self, time_point: str) -> np.ndarray:
        """N x d slice at one time point."""
        try:
            t = self.time_points.index(time_point)
        except ValueError:
            raise InvalidSpec(f"unknown time point {time_point!r}") from None
        return self.values[:, t, :]

    def pooled_matrix(self) -> np.ndarray:
        """(N*T) x d matrix stacking every (player, time) observation."""
        return self.values.reshape(-1, self.n_features)

    def to_json_dict(self) -> dict:
        return {
            "player_ids": list(self.player_ids),
            "time_points": list(self.time_points),
            "feature_names": list(self.feature_names),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TimeSeriesTensor":
        return cls(
            player_ids=list(obj["player_ids"]),
            time_points=list(obj["time_points"]),
            feature_names=list(obj["feature_names"]),
            values=np.asarray(obj["values"], dtype=np.float64),
        )


class SocialGraph:
    """Undirected weighted friendship graph.

    Each unordered pair is stored once (u < v by node index); adjacency is
    exposed as CSR arrays for O(deg) neighbor iteration and for the jitted
    kernels.
    """

    def __init__(
        self,
        node_ids: list[str],
        edge_u: np.ndarray,
        edge_v: np.ndarray,
        weights: np.ndarray,
        self_loops_dropped: int = 0,
    ):
        self.node_ids = list(node_ids)
        self.index = {nid: i for i, nid in enumerate(self.node_ids)}
        self.edge_u = np.asarray(edge_u, dtype=np.int64)
        self.edge_v = np.asarray(edge_v, dtype=np.int64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.self_loops_dropped = self_loops_dropped
        self._csr = None
        if np.any(self.edge_u == self.edge_v):
            raise InvalidSpec("self loops are not allowed")
        if np.any(self.weights <= 0):
            raise InvalidSpec("edge weights must be positive")

    @classmethod
    def from_edges(
        cls,
        edges: list[tuple[str, str, float]],
        extra_nodes: list[str] | None = None,
    ) -> "SocialGraph":
        """Build a graph from (u, v, weight) triples.

        Duplicate unordered pairs merge by summing weights; self loops are
        dropped (their endpoints still become nodes) and counted.
        `extra_nodes` are registered first, pinning the node order; edge
        endpoints not listed there follow in first-appearance order.
        """
        order: dict[str, int] = {}
        merged: dict[tuple[int, int], float] = {}
        dropped = 0

        def idx(name: str) -> int:
            if name not in order:
                order[name] = len(order)
            return order[name]

        for name in extra_nodes or []:
            idx(name)
        for u, v, w in edges:
            ui, vi = idx(u), idx(v)
            if ui == vi:
                dropped += 1
                continue
            key = (ui, vi) if ui < vi else (vi, ui)
            merged[key] = merged.get(key, 0.0) + float(w)
        if dropped:
            log.warning("dropped %d self-loop edge(s)", dropped)
        node_ids = list(order)
        if merged:
            keys = sorted(merged)
            eu = np.array([k[0] for k in keys], dtype=np.int64)
            ev = np.array([k[1] for k in keys], dtype=np.int64)
            ws = np.array([merged[k] for k in keys], dtype=np.float64)
        else:
            eu = np.empty(0, dtype=np.int64)
            ev = np.empty(0, dtype=np.int64)
            ws = np.empty(0, dtype=np.float64)
        return cls(node_ids, eu, ev, ws, self_loops_dropped=dropped)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return int(self.edge_u.size)

    def edges(self) -> list[tuple[str, str, float]]:
        return [
            (self.node_ids[u], self.node_ids[v], float(w))
            for u, v, w in zip(self.edge_u, self.edge_v, self.weights)
        ]

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, indices, weights) with both directions materialized.

        Neighbor lists are sorted by node index.
        """
        if self._csr is None:
            n = self.n_nodes
            deg = np.zeros(n, dtype=np.int64)
            np.add.at(deg, self.edge_u, 1)
            np.add.at(deg, self.edge_v, 1)
            indptr = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(deg, out=indptr[1:])
            indices = np.empty(indptr[-1], dtype=np.int64)
            w = np.empty(indptr[-1], dtype=np.float64)
            cursor = indptr[:-1].copy()
            for u, v, wt in zip(self.edge_u, self.edge_v, self.weights):
                indices[cursor[u]] = v
                w[cursor[u]] = wt
                cursor[u] += 1
                indices[cursor[v]] = u
                w[cursor[v]] = wt
                cursor[v] += 1
            for i in range(n):
                sl = slice(indptr[i], indptr[i + 1])
                order = np.argsort(indices[sl], kind="stable")
                indices[sl] = indices[sl][order]
                w[sl] = w[sl][order]
            self._csr = (indptr, indices, w)
        return self._csr

    def degrees(self) -> np.ndarray:
        indptr, _, _ = self.csr()
        return np.diff(indptr)

    def strengths(self) -> np.ndarray:
        """Weighted degree per node."""
        indptr, _, w = self.csr()
        out = np.zeros(self.n_nodes)
        for i in range(self.n_nodes):
            out[i] = w[indptr[i] : indptr[i + 1]].sum()
        return out

    def neighbors(self, node_idx: int) -> np.ndarray:
        indptr, indices, _ = self.csr()
        return indices[indptr[node_idx] : indptr[node_idx + 1]]

    def subgraph(self, keep: list[int]) -> "SocialGraph":
        """Induced subgraph on the given node indices (order preserved)."""
        keep_set = set(keep)
        remap = {old: new for new, old in enumerate(keep)}
        mask = [
            i
            for i in range(self.n_edges)
            if self.edge_u[i] in keep_set and self.edge_v[i] in keep_set
        ]
        eu = np.array([remap[int(self.edge_u[i])] for i in mask], dtype=np.int64)
        ev = np.array([remap[int(self.edge_v[i])] for i in mask], dtype=np.int64)
        ws = self.weights[mask] if mask else np.empty(0)
        lo = np.minimum(eu, ev) if eu.size else eu
        hi = np.maximum(eu, ev) if eu.size else ev
        return SocialGraph([self.node_ids[i] for i in keep], lo, hi, ws)

    def to_json_dict(self) -> dict:
        return {"node_ids": list(self.node_ids), "edges": [[u, v, w] for u, v, w in self.edges()]}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "SocialGraph":
        return cls.from_edges(
            [(u, v, float(w)) for u, v, w in obj["edges"]],
            extra_nodes=list(obj["node_ids"]),
        )


def _decode(csv_bytes) -> io.StringIO:
    if isinstance(csv_bytes, (bytes, bytearray)):
        return io.StringIO(csv_bytes.decode("utf-8"))
    if isinstance(csv_bytes, str):
        return io.StringIO(csv_bytes)
    return io.StringIO(csv_bytes.read().decode("utf-8"))


def parse_snapshots(csv_bytes, schema: list[str]) -> list[PlayerSnapshot]:
    """Parse a snapshot table into one PlayerSnapshot per data row.

    The header must contain ``player_id``, ``time_point``, and every schema
    column. Unparseable numeric cells become missing attributes; a wrong
    field count raises MalformedRow.
    """
    reader = csv.reader(_decode(csv_bytes))
    try:
        header = next(reader)
    except StopIteration:
        raise MissingColumn("player_id") from None
    col = {name: i for i, name in enumerate(header)}
    for required in ("player_id", "time_point"):
        if required not in col:
            raise MissingColumn(required)
    for name in schema:
        if name not in col:
            raise MissingColumn(name)
    out: list[PlayerSnapshot] = []
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedRow(line_no, f"expected {len(header)} fields, got {len(row)}")
        attrs: dict[str, float] = {}
        for name in schema:
            cell = row[col[name]].strip()
            if not cell:
                continue
            try:
                attrs[name] = float(cell)
            except ValueError:
                pass  # unparseable numeric -> missing
        out.append(
            PlayerSnapshot(
                player_id=row[col["player_id"]],
                time_point=row[col["time_point"]],
                attributes=attrs,
            )
        )
    return out


def mode_choice_ratio(funny_mode_games: int, total_games: int) -> float:
    """Share of games played in the funny mode; 0 when no games were played."""
    if funny_mode_games < 0 or total_games < 0:
        raise InvalidCounts(
            f"negative counts: funny={funny_mode_games}, total={total_games}"
        )
    if total_games == 0:
        if funny_mode_games > 0:
            raise InvalidCounts(f"funny={funny_mode_games} with total=0")
        return 0.0
    if funny_mode_games > total_games:
        raise InvalidCounts(
            f"funny={funny_mode_games} exceeds total={total_games}"
        )
    return funny_mode_games / total_games


def derive_mode_choice_ratio(snapshots: list[PlayerSnapshot]) -> list[PlayerSnapshot]:
    """Fill in mode_choice_ratio from the raw game counters where absent.

    Snapshots missing either counter are left untouched; rows with
    inconsistent counters (funny > total) also stay untouched rather than
    failing ingestion.
    """
    for s in snapshots:
        if "mode_choice_ratio" in s.attributes:
            continue
        funny = s.attributes.get("funny_mode_games")
        total = s.attributes.get("total_games")
        if funny is None or total is None:
            continue
        try:
            s.attributes["mode_choice_ratio"] = mode_choice_ratio(funny, total)
        except InvalidCounts:
            log.warning(
                "inconsistent game counters for %s at %s: funny=%s total=%s",
                s.player_id, s.time_point, funny, total,
            )
    return snapshots


def assemble_tensor(
    snapshots: list[PlayerSnapshot], features: list[str]
) -> TimeSeriesTensor:
    """Pivot snapshots into an (N, T, d) tensor, zero-filling absent cells.

    Player order follows first appearance; time points sort ascending.
    Supplying the same cell twice with different values raises DuplicateCell.
    """
    if not snapshots:
        raise EmptyInput("no snapshots supplied")
    if not features:
        raise InvalidSpec("feature list is empty")
    players: dict[str, int] = {}
    times = sorted({s.time_point for s in snapshots})
    t_index = {t: i for i, t in enumerate(times)}
    for s in snapshots:
        if s.player_id not in players:
            players[s.player_id] = len(players)
    values = np.zeros((len(players), len(times), len(features)))
    seen = np.zeros(values.shape, dtype=bool)
    for s in snapshots:
        pi = players[s.player_id]
        ti = t_index[s.time_point]
        for fi, name in enumerate(features):
            if name not in s.attributes:
                continue
            v = s.attributes[name]
            if seen[pi, ti, fi] and values[pi, ti, fi] != v:
                raise DuplicateCell(s.player_id, s.time_point, name)
            values[pi, ti, fi] = v
            seen[pi, ti, fi] = True
    return TimeSeriesTensor(
        player_ids=list(players),
        time_points=times,
        feature_names=list(features),
        values=values,
    )


def parse_edge_list(csv_bytes) -> SocialGraph:
    """Parse `u,v[,weight]` rows into a SocialGraph.

    Weight defaults to 1.0. Duplicate unordered pairs merge by weight sum;
    self loops are dropped with a counted warning.
    """
    reader = csv.reader(_decode(csv_bytes))
    edges: list[tuple[str, str, float]] = []
    for line_no, row in enumerate(reader, start=1):
        if not row:
            continue
        if len(row) not in (2, 3):
            raise MalformedRow(line_no, f"expected 2 or 3 fields, got {len(row)}")
        u, v = row[0].strip(), row[1].strip()
        if not u or not v:
            raise MalformedRow(line_no, "empty endpoint")
        w = 1.0
        if len(row) == 3:
            try:
                w = float(row[2])
            except ValueError:
                raise MalformedRow(line_no, f"bad weight {row[2]!r}") from None
            if w <= 0:
                raise MalformedRow(line_no, f"non-positive weight {w}")
        edges.append((u, v, w))
    return SocialGraph.from_edges(edges)


@dataclass
class SyntheticSpec:
    """Desk-scale synthetic dataset with planted temporal clusters and graph
    communities."""

    n_players: int = 300
    n_timepoints: int = 4
    n_features: int = 5
    n_clusters: int = 3
    separation: float = 5.0
    communities: int = 3
    p_in: float = 0.3
    p_out: float = 0.02
    seed: int = 0

    def validate(self):
        if min(self.n_players, self.n_timepoints, self.n_features) < 1:
            raise InvalidSpec("counts must be >= 1")
        if not (1 <= self.n_clusters <= self.n_players):
            raise InvalidSpec("n_clusters must be in [1, n_players]")
        if self.communities < 1:
            raise InvalidSpec("communities must be >= 1")
        if not (0.0 <= self.p_out <= self.p_in <= 1.0):
            raise InvalidSpec("need 0 <= p_out <= p_in <= 1")
        if self.separation < 0:
            raise InvalidSpec("separation must be >= 0")


def generate_synthetic(
    spec: SyntheticSpec,
) -> tuple[TimeSeriesTensor, SocialGraph, np.ndarray]:
    """Generate (tensor, graph, labels) with planted structure.

    Cluster mean curves are piecewise-linear random walks per feature scaled
    by ``separation`` (unit noise sigma on top), so recovering them requires
    the temporal shape, not just a level offset. The graph is a planted
    partition over ``communities`` groups; node i's community is
    ``labels[i] % communities``, so with communities == n_clusters the
    tensor labels double as graph ground truth.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, t, d, k = spec.n_players, spec.n_timepoints, spec.n_features, spec.n_clusters

    labels = np.sort(rng.integers(0, k, size=n))
    # guarantee every cluster is populated
    labels[:k] = np.arange(k)
    labels = labels[rng.permutation(n)]

    curves = spec.separation * np.cumsum(rng.standard_normal((k, t, d)), axis=1)
    values = curves[labels] + rng.standard_normal((n, t, d))

    player_ids = [f"p{i:04d}" for i in range(n)]
    start = np.datetime64("2023-10-01")
    time_points = [str(start + np.timedelta64(7 * i, "D")) for i in range(t)]
    feature_names = [f"f{j}" for j in range(d)]
    tensor = TimeSeriesTensor(player_ids, time_points, feature_names, values)

    comm = labels % spec.communities
    edges: list[tuple[str, str, float]] = []
    for i in range(n):
        p_row = np.where(comm[i + 1 :] == comm[i], spec.p_in, spec.p_out)
        hits = np.nonzero(rng.random(n - i - 1) < p_row)[0]
        for j in hits:
            edges.append((player_ids[i], player_ids[i + 1 + j], 1.0))
    graph = SocialGraph.from_edges(edges, extra_nodes=player_ids)
    log.info("synthetic dataset: seed=%d n=%d edges=%d", spec.seed, n, graph.n_edges)
    return tensor, graph, labels
