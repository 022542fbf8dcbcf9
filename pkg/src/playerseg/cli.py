"""Pipeline CLI: subcommands over a JSON config with flag overrides.

Every artifact is written atomically (temp file + rename), every stochastic
stage logs its effective seed, and identical (config, seed) runs produce
byte-identical artifacts. Exit codes: 0 success, 1 domain error (single
machine-parseable JSON line on stderr), 2 usage/config error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import mimetypes
import os
import sys
import tempfile
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from . import clustering, dimred, embeddings, features, graphstats, ingest, report
from .errors import ConfigInvalid, InvalidSpec, PlayersegError

log = logging.getLogger(__name__)

DEFAULT_CONFIG: dict = {
    "snapshots": None,  # defaults to <out>/snapshots.csv
    "edges": None,  # defaults to <out>/edges.csv
    "out": "artifacts",
    "seed": 0,
    "temporal_features": None,  # null -> every attribute column found
    "static_features": None,
    "k_temporal": 3,
    "k_static": 5,
    "static_time_point": None,  # null -> last time point
    "score_time_point": None,  # null -> pool all (player, time) rows
    "formula": "table",
    "kmeans": {"max_iter": 300, "tol": 1e-6, "n_init": 10},
    "embedding": {
        "method": "deepwalk",
        "dim": 64,
        "walks_per_node": 10,
        "walk_length": 40,
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "samples_per_edge": 100,
        "order": "first",
        "lr_start": 0.025,
        "lr_end": 1e-4,
        "format": "json",
    },
    "pagerank": {"damping": 0.85, "tol": 1e-10, "max_iter": 200, "weighted": True},
    "kol": {"snapshots": [], "k": 15},
    "project": {
        "source": "temporal",
        "method": "pca",
        "perplexity": 30.0,
        "iters": 1000,
        "lr": 200.0,
        "clusters": None,
    },
    "report": {"clusters": None, "features": None, "grid_points": 64},
    "synthetic": {
        "n_players": 300,
        "n_timepoints": 4,
        "n_features": 5,
        "n_clusters": 3,
        "separation": 5.0,
        "communities": 3,
        "p_in": 0.3,
        "p_out": 0.02,
    },
    "serve": {"port": 8000, "host": "127.0.0.1", "ui_dir": "frontend"},
}

SUBCOMMANDS = (
    "ingest",
    "score-features",
    "cluster-temporal",
    "cluster-static",
    "embed-graph",
    "graph-metrics",
    "kol",
    "project",
    "report",
    "synth",
    "serve",
)


# ---------------------------------------------------------------- config

def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path, "rb") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid("config root must be a JSON object")
    return _deep_merge(DEFAULT_CONFIG, data)


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """Apply `key.path=value` overrides; values parse as JSON when possible."""
    for item in overrides:
        if "=" not in item:
            raise ConfigInvalid(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigInvalid(f"unknown config section {part!r} in {key!r}")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigInvalid(f"unknown config key {key!r}")
        node[parts[-1]] = value
    return config


# ---------------------------------------------------------------- io helpers

def write_atomic(path: Path, data: str | bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=None, separators=(",", ":")) + "\n"


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _out_dir(config: dict) -> Path:
    return Path(config["out"])


def _snapshots_path(config: dict) -> Path:
    return Path(config["snapshots"] or _out_dir(config) / "snapshots.csv")


def _edges_path(config: dict) -> Path:
    return Path(config["edges"] or _out_dir(config) / "edges.csv")


def _load_tensor(config: dict, features_key: str) -> ingest.TimeSeriesTensor:
    path = _snapshots_path(config)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise InvalidSpec(f"snapshot file not found: {path}") from None
    header = blob.split(b"\n", 1)[0].decode("utf-8")
    columns = next(csv.reader([header]))
    counters = [c for c in ingest.RAW_COUNTERS if c in columns]
    selected = config[features_key]
    if selected is None:
        selected = [
            c
            for c in columns
            if c not in ("player_id", "time_point") and c not in ingest.RAW_COUNTERS
        ]
        if counters == ingest.RAW_COUNTERS and "mode_choice_ratio" not in selected:
            selected.append("mode_choice_ratio")
    # raw game counters ride along so mode_choice_ratio can be derived;
    # derived feature names are exempt from the column-must-exist rule
    parse_cols = [
        c for c in selected if c in columns or c != "mode_choice_ratio"
    ] + counters
    snaps = ingest.parse_snapshots(blob, list(dict.fromkeys(parse_cols)))
    ingest.derive_mode_choice_ratio(snaps)
    return ingest.assemble_tensor(snaps, selected)


def _load_graph(config: dict, path: Path | None = None) -> ingest.SocialGraph:
    path = path or _edges_path(config)
    try:
        blob = path.read_bytes()
    except FileNotFoundError:
        raise InvalidSpec(f"edge file not found: {path}") from None
    return ingest.parse_edge_list(blob)


def _static_matrix(
    config: dict,
) -> tuple[np.ndarray, list[str], list[str]]:
    """(matrix, player_ids, feature_names) at the configured static time point."""
    tensor = _load_tensor(config, "static_features")
    tp = config["static_time_point"] or tensor.time_points[-1]
    return tensor.matrix_at(tp), tensor.player_ids, tensor.feature_names


def _load_assignments(path: Path) -> tuple[dict[str, int], int]:
    try:
        obj = json.loads(path.read_text())
    except FileNotFoundError:
        raise InvalidSpec(f"cluster file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"cluster file {path} is not valid JSON: {exc}") from None
    try:
        return {str(k): int(v) for k, v in obj["assignments"].items()}, int(obj["K"])
    except (KeyError, AttributeError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"cluster file {path} is malformed: {exc}") from None


def _clusters_path(config: dict, explicit: str | None) -> Path:
    """Explicit path if set, else static clusters, else temporal clusters."""
    if explicit:
        return Path(explicit)
    static = _out_dir(config) / "static_clusters.json"
    if static.exists():
        return static
    return _out_dir(config) / "temporal_clusters.json"


# ---------------------------------------------------------------- commands

def cmd_synth(config: dict) -> None:
    spec = ingest.SyntheticSpec(seed=config["seed"], **config["synthetic"])
    tensor, graph, labels = ingest.generate_synthetic(spec)
    rows = []
    for pi, pid in enumerate(tensor.player_ids):
        for ti, tp in enumerate(tensor.time_points):
            rows.append([pid, tp] + [repr(float(v)) for v in tensor.values[pi, ti]])
    out = _out_dir(config)
    write_atomic(
        out / "snapshots.csv",
        _csv_text(["player_id", "time_point"] + tensor.feature_names, rows),
    )
    # edge lists are headerless `u,v,weight` rows
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows([[u, v, repr(w)] for u, v, w in graph.edges()])
    write_atomic(out / "edges.csv", buf.getvalue())
    write_atomic(
        out / "labels.json",
        dump_json({pid: int(c) for pid, c in zip(tensor.player_ids, labels)}),
    )


def cmd_ingest(config: dict) -> None:
    tensor = _load_tensor(config, "temporal_features")
    graph = _load_graph(config)
    out = _out_dir(config)
    write_atomic(out / "tensor.json", dump_json(tensor.to_json_dict()))
    write_atomic(out / "graph.json", dump_json(graph.to_json_dict()))


def cmd_score_features(config: dict) -> None:
    tensor = _load_tensor(config, "temporal_features")
    tp = config["score_time_point"]
    matrix = tensor.matrix_at(tp) if tp else tensor.pooled_matrix()
    ranked = features.rank_features(matrix, tensor.feature_names, config["formula"])
    rows = [
        [s.feature, repr(s.norm_pca), repr(s.norm_vif), repr(s.norm_corr), repr(s.score)]
        for s in ranked
    ]
    write_atomic(
        _out_dir(config) / "scores.csv",
        _csv_text(["feature", "norm_pca", "norm_vif", "norm_corr", "score"], rows),
    )


def _kmeans_opts(config: dict) -> clustering.KMeansOpts:
    km = config["kmeans"]
    return clustering.KMeansOpts(
        max_iter=int(km["max_iter"]),
        tol=float(km["tol"]),
        n_init=int(km["n_init"]),
        seed=int(config["seed"]),
    )


def cmd_cluster_temporal(config: dict) -> None:
    tensor = _load_tensor(config, "temporal_features")
    model = clustering.ts_kmeans(tensor, int(config["k_temporal"]), _kmeans_opts(config))
    write_atomic(
        _out_dir(config) / "temporal_clusters.json",
        dump_json(model.to_json_dict(tensor.player_ids)),
    )


def cmd_cluster_static(config: dict) -> None:
    matrix, ids, _ = _static_matrix(config)
    model = clustering.kmeans(matrix, int(config["k_static"]), _kmeans_opts(config))
    write_atomic(
        _out_dir(config) / "static_clusters.json",
        dump_json(model.to_json_dict(ids)),
    )


def _embed_opts(config: dict) -> embeddings.EmbedOpts:
    e = config["embedding"]
    return embeddings.EmbedOpts(
        dim=int(e["dim"]),
        walks_per_node=int(e["walks_per_node"]),
        walk_length=int(e["walk_length"]),
        window=int(e["window"]),
        negatives=int(e["negatives"]),
        epochs=int(e["epochs"]),
        samples_per_edge=int(e["samples_per_edge"]),
        order=str(e["order"]),
        lr_schedule=(float(e["lr_start"]), float(e["lr_end"])),
        seed=int(config["seed"]),
    )


def cmd_embed_graph(config: dict) -> None:
    graph = _load_graph(config)
    emb = embeddings.embed_graph(graph, config["embedding"]["method"], _embed_opts(config))
    out = _out_dir(config)
    if config["embedding"]["format"] == "csv":
        header = ["node_id"] + [f"v{i}" for i in range(emb.dim)]
        rows = [
            [nid] + [repr(float(v)) for v in emb.vectors[i]]
            for i, nid in enumerate(emb.node_ids)
        ]
        write_atomic(out / "embeddings.csv", _csv_text(header, rows))
    else:
        write_atomic(out / "embeddings.json", dump_json(emb.to_json_dict()))


def cmd_graph_metrics(config: dict) -> None:
    graph = _load_graph(config)
    assignments, _ = _load_assignments(_clusters_path(config, None))
    rows = graphstats.cluster_subgraph_stats(graph, assignments)
    csv_rows = [
        [
            str(label),
            stats.nodes,
            stats.edges,
            stats.connected_components,
            repr(stats.avg_clustering_coeff),
            stats.triangles,
        ]
        for label, stats in rows
    ]
    write_atomic(
        _out_dir(config) / "metrics.csv",
        _csv_text(["cluster", "node", "edge", "cc", "acc", "triangles"], csv_rows),
    )


def cmd_kol(config: dict) -> None:
    paths = [Path(p) for p in config["kol"]["snapshots"]] or [_edges_path(config)]
    k = int(config["kol"]["k"])
    pr = config["pagerank"]
    kwargs = {
        "damping": float(pr["damping"]),
        "tol": float(pr["tol"]),
        "max_iter": int(pr["max_iter"]),
        "weighted": bool(pr["weighted"]),
    }
    per_snapshot = []
    for path in paths:
        graph = _load_graph(config, path)
        per_snapshot.append(
            graphstats.top_k_influencers(graphstats.pagerank(graph, **kwargs), k)
        )
    persistent = set(per_snapshot[0])
    for top in per_snapshot[1:]:
        persistent &= set(top)
    write_atomic(
        _out_dir(config) / "kol.json",
        dump_json({"per_snapshot_topk": per_snapshot, "persistent": sorted(persistent)}),
    )


def cmd_project(config: dict) -> None:
    p = config["project"]
    source = p["source"]
    if source == "temporal":
        tensor = _load_tensor(config, "temporal_features")
        matrix = tensor.values.reshape(tensor.n_players, -1)
        ids = tensor.player_ids
    elif source == "static":
        matrix, ids, _ = _static_matrix(config)
    elif source == "embeddings":
        path = _out_dir(config) / "embeddings.json"
        try:
            obj = json.loads(path.read_text())
        except FileNotFoundError:
            raise InvalidSpec(f"embeddings file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"embeddings file is not valid JSON: {exc}") from None
        matrix = np.asarray(obj["vectors"], dtype=np.float64)
        ids = list(obj["node_ids"])
    else:
        raise InvalidSpec(f"unknown projection source {source!r}")
    if p["method"] == "pca":
        model = dimred.pca_fit(matrix, 2)
        proj = dimred.pca_project(model, matrix, ids=ids)
    elif p["method"] == "tsne":
        proj = dimred.tsne(
            matrix,
            perplexity=float(p["perplexity"]),
            iters=int(p["iters"]),
            lr=float(p["lr"]),
            seed=int(config["seed"]),
            ids=ids,
        )
    else:
        raise InvalidSpec(f"unknown projection method {p['method']!r}")
    cluster_of: dict[str, int] = {}
    if p["clusters"]:
        cluster_of, _ = _load_assignments(Path(p["clusters"]))
    rows = [
        [pid, repr(float(x)), repr(float(y)), cluster_of.get(pid, "")]
        for pid, (x, y) in zip(proj.ids, proj.coords)
    ]
    write_atomic(
        _out_dir(config) / "projection.csv", _csv_text(["id", "x", "y", "cluster"], rows)
    )


def cmd_report(config: dict) -> None:
    matrix, ids, names = _static_matrix(config)
    if config["report"]["features"]:
        keep = [names.index(f) for f in config["report"]["features"]]
        matrix = matrix[:, keep]
        names = [names[i] for i in keep]
    assignments, k = _load_assignments(
        _clusters_path(config, config["report"]["clusters"])
    )
    try:
        labels = [assignments[pid] for pid in ids]
    except KeyError as exc:
        raise InvalidSpec(f"player {exc.args[0]!r} missing from cluster file") from None
    rep = report.build_report(
        matrix, names, labels, k, grid_points=int(config["report"]["grid_points"])
    )
    write_atomic(_out_dir(config) / "report.json", rep.to_json() + "\n")


# ---------------------------------------------------------------- serve

class _StaticHandler(BaseHTTPRequestHandler):
    ui_dir: Path
    report_dir: Path

    def log_message(self, fmt, *args):  # route through logging, not stderr prints
        log.debug("serve: " + fmt, *args)

    def _send(self, status: int, content_type: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):  # noqa: N802 (http.server API)
        path = self.path.split("?", 1)[0]
        if path == "/reports/" or path == "/reports":
            listing = sorted(p.name for p in self.report_dir.glob("*.json"))
            self._send(200, "application/json", dump_json(listing).encode())
            return
        if path.startswith("/reports/"):
            name = Path(path[len("/reports/"):]).name  # basename only
            target = self.report_dir / name
            if not target.is_file():
                self._send(404, "text/plain", b"not found")
                return
            self._send(200, "application/json", target.read_bytes())
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not target.is_relative_to(self.ui_dir.resolve()) or not target.is_file():
            self._send(404, "text/plain", b"not found")
            return
        ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        self._send(200, ctype, target.read_bytes())


def make_server(config: dict) -> ThreadingHTTPServer:
    handler = type(
        "Handler",
        (_StaticHandler,),
        {
            "ui_dir": Path(config["serve"]["ui_dir"]),
            "report_dir": _out_dir(config),
        },
    )
    return ThreadingHTTPServer(
        (config["serve"]["host"], int(config["serve"]["port"])), handler
    )


def cmd_serve(config: dict) -> None:
    server = make_server(config)
    host, port = server.server_address[:2]
    log.info("serving UI from %s and reports from %s at http://%s:%s/",
             config["serve"]["ui_dir"], config["out"], host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "score-features": cmd_score_features,
    "cluster-temporal": cmd_cluster_temporal,
    "cluster-static": cmd_cluster_static,
    "embed-graph": cmd_embed_graph,
    "graph-metrics": cmd_graph_metrics,
    "kol": cmd_kol,
    "project": cmd_project,
    "report": cmd_report,
    "serve": cmd_serve,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="playerseg",
        description="Player-behavior segmentation pipeline",
    )
    parser.add_argument("command", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--seed", type=int, default=None, help="global seed override")
    parser.add_argument("--out", default=None, help="artifact directory override")
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args, extras = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = load_config(args.config)
        overrides = []
        for item in extras:
            if not item.startswith("--"):
                raise ConfigInvalid(f"unrecognized argument {item!r}")
            overrides.append(item[2:])
        apply_overrides(config, overrides)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.out is not None:
            config["out"] = args.out
        log.info("command=%s seed=%d out=%s", args.command, config["seed"], config["out"])
        COMMANDS[args.command](config)
        return 0
    except ConfigInvalid as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    except PlayersegError as exc:
        print(json.dumps({"error": exc.code, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
