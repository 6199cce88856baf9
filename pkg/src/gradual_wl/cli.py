"""Batch command line interface.

Exit codes: 0 success, 1 usage, 2 input/parse error, 3 resource or size guard.
Option precedence: command-line flags, then ``--config`` (flat ``key=value``), then defaults.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import generate_dataset, preset
from .ged import EditCostModel, SizeGuardError, gwlt_distance_matrix, knn_report
from .kernels import (
    gram_from_refinement,
    read_labels,
    read_matrix_csv,
    refine_dataset,
    subtree_features,
    write_features,
    write_gram,
    write_labels,
)
from .tudataset import DatasetError, load_tudataset, write_tudataset

log = logging.getLogger("gradual_wl")

DEFAULTS = {
    "dataset": None,
    "name": None,
    "update": "kmeans",
    "k": 2,
    "h": 3,
    "kernel": "subtree",
    "normalize": False,
    "costs": None,
    "out": None,
    "seed": 0,
    "threads": 1,
    "preset": "S_1.0_0",
    "graphs_per_class": None,
    "knn_k": 1,
    "distances": None,
    "labels": None,
    "members": False,
}
_REFINE = ("dataset", "name", "update", "k", "h", "seed")
# options echoed into each command's provenance header; threads is left out
# on purpose since output must not depend on it
ECHOED = {
    "refine": _REFINE + ("members",),
    "gram": _REFINE + ("kernel", "normalize"),
    "features": _REFINE,
    "ged": _REFINE + ("costs",),
    "knn": ("distances", "labels", "knn_k"),
    "gen": ("preset", "graphs_per_class", "seed"),
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _check_input(path, what):
    if not Path(path).is_file():
        raise InputError(f"{what} file not found: {path}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _add_common(p):
    p.add_argument("--config", help="flat key=value file with option values (flags win)")
    p.add_argument("--out", help="output file (directory for gen)")
    p.add_argument("--seed", type=int, help="random seed (default: 0)")
    p.add_argument("--threads", type=int, help="worker threads for pairwise jobs (default: 1)")


def _add_dataset(p):
    p.add_argument("--dataset", help="TUDataset directory")
    p.add_argument("--name", help="dataset name inside the directory (default: directory name)")


def _add_refinement(p):
    p.add_argument("--update", choices=["wl", "kmeans"], help="refinement update (default: kmeans)")
    p.add_argument("--k", type=int, help="clusters per color for kmeans (default: 2)")
    p.add_argument("--h", type=int, help="refinement iterations (default: 3)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gwl", description="Gradual Weisfeiler-Leman refinement, kernels and GED bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("refine", help="hierarchy JSON plus per-iteration color counts")
    _add_dataset(p)
    _add_refinement(p)
    p.add_argument("--members", action="store_true", default=None, help="include member lists in the JSON (default: off)")
    _add_common(p)

    p = sub.add_parser("gram", help="gram matrix CSV plus .labels sidecar")
    _add_dataset(p)
    _add_refinement(p)
    p.add_argument("--kernel", choices=["subtree", "oa"], help="kernel (default: subtree)")
    p.add_argument("--normalize", action="store_true", default=None, help="cosine-normalize (default: off)")
    _add_common(p)

    p = sub.add_parser("features", help="sparse subtree features, one graph per line")
    _add_dataset(p)
    _add_refinement(p)
    _add_common(p)

    p = sub.add_parser("ged", help="GWLT edit distance upper bound matrix CSV")
    _add_dataset(p)
    _add_refinement(p)
    p.add_argument("--costs", help="key=value edit cost file (default: all costs 1)")
    _add_common(p)

    p = sub.add_parser("knn", help="k-nearest-neighbor leave-one-out accuracy report")
    p.add_argument("--distances", help="distance matrix CSV (as written by ged)")
    p.add_argument("--labels", help="class label file, one per line")
    p.add_argument("--k", "--knn-k", dest="knn_k", type=int, help="number of neighbors (default: 1)")
    _add_common(p)

    p = sub.add_parser("gen", help="generate a synthetic block-graph dataset")
    p.add_argument("--preset", help="S_<p>_<m> or L1..L4 (default: S_1.0_0)")
    p.add_argument("--graphs-per-class", type=int, help="graphs per class (default: the preset value)")
    _add_common(p)
    return parser


def read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
            default = DEFAULTS[key]
            if isinstance(default, bool):
                out[key] = value.lower() in ("1", "true", "yes", "on")
            elif isinstance(default, int) or key == "graphs_per_class":
                out[key] = int(value)
            else:
                out[key] = value
    return out


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS, command=args.command)
    if getattr(args, "config", None):
        _check_input(args.config, "config")
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is not None:
            cfg[key] = value
    if cfg["h"] < 0:
        raise UsageError("--h must be non-negative")
    if cfg["update"] == "kmeans" and cfg["k"] < 2:
        raise UsageError("--k must be at least 2 for kmeans")
    if cfg["threads"] < 1:
        raise UsageError("--threads must be positive")
    for key in ("costs", "distances", "labels"):
        if cfg[key]:
            _check_input(cfg[key], key)
    return cfg


def provenance(cfg: dict) -> list:
    keys = ECHOED[cfg["command"]]
    echo = " ".join(f"{k}={cfg[k]}" for k in keys if cfg[k] is not None)
    return [f"gradual_wl {__version__}", f"config: command={cfg['command']} {echo}"]


def _load(cfg):
    if not cfg["dataset"]:
        raise UsageError("--dataset is required")
    directory = Path(cfg["dataset"])
    name = cfg["name"] or directory.name
    return load_tudataset(directory, name)


def _require_out(cfg):
    if not cfg["out"]:
        raise UsageError("--out is required")
    return Path(cfg["out"])


def cmd_refine(cfg):
    out = _require_out(cfg)
    ds = _load(cfg)
    union, hier, colorings = refine_dataset(ds, cfg["update"], cfg["h"], cfg["k"], cfg["seed"])
    doc = {"provenance": provenance(cfg), "hierarchy": hier.to_dict(include_members=bool(cfg["members"]))}
    out.write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")
    table = out.with_suffix(".counts.csv")
    with open(table, "w", newline="", encoding="utf-8") as fh:
        for line in provenance(cfg):
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "colors"])
        for i, col in enumerate(colorings):
            w.writerow([i, len(np.unique(col))])
    print(f"wrote {out} and {table}")


def cmd_gram(cfg):
    out = _require_out(cfg)
    ds = _load(cfg)
    union, hier, colorings = refine_dataset(ds, cfg["update"], cfg["h"], cfg["k"], cfg["seed"])
    g = gram_from_refinement(union, hier, colorings, cfg["kernel"], bool(cfg["normalize"]))
    path, sidecar = write_gram(out, g, ds.class_labels, provenance(cfg))
    print(f"wrote {path} and {sidecar}")


def cmd_features(cfg):
    out = _require_out(cfg)
    ds = _load(cfg)
    union, hier, colorings = refine_dataset(ds, cfg["update"], cfg["h"], cfg["k"], cfg["seed"])
    write_features(out, subtree_features(hier, colorings, union), ds.class_labels, provenance(cfg))
    print(f"wrote {out}")


def cmd_ged(cfg):
    out = _require_out(cfg)
    ds = _load(cfg)
    costs = EditCostModel.from_file(cfg["costs"]) if cfg["costs"] else EditCostModel()
    header = provenance(cfg) + [f"costs: {costs}"]
    with open(out, "w", newline="", encoding="utf-8") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([str(i) for i in range(len(ds))])

        def sink(i, row):
            w.writerow([repr(float(x)) for x in row])

        gwlt_distance_matrix(ds, cfg["h"], cfg["k"], cfg["update"], cfg["seed"], costs, cfg["threads"], sink)
    write_labels(out.with_suffix(".labels"), ds.class_labels, header)
    print(f"wrote {out}")


def cmd_knn(cfg):
    if not cfg["distances"] or not cfg["labels"]:
        raise UsageError("--distances and --labels are required")
    d, _ = read_matrix_csv(cfg["distances"])
    labels = read_labels(cfg["labels"])
    report = knn_report(labels, d, cfg["knn_k"], source=str(cfg["distances"]))
    if cfg["out"]:
        Path(cfg["out"]).write_text("".join(f"# {l}\n" for l in provenance(cfg)) + report, encoding="utf-8")
    sys.stdout.write(report)


def cmd_gen(cfg):
    out = _require_out(cfg)
    params = preset(cfg["preset"], rng_seed=cfg["seed"], graphs_per_class=cfg["graphs_per_class"])
    ds = generate_dataset(params)
    write_tudataset(ds, out, ds.name)
    (out / f"{ds.name}_provenance.txt").write_text("\n".join(provenance(cfg)) + "\n", encoding="utf-8")
    print(f"wrote {len(ds)} graphs to {out}")


COMMANDS = {
    "refine": cmd_refine,
    "gram": cmd_gram,
    "features": cmd_features,
    "ged": cmd_ged,
    "knn": cmd_knn,
    "gen": cmd_gen,
}


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("GWL_LOGLEVEL", "WARNING"))
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return 1
    try:
        cfg = resolve(args)
        COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"gwl: error: {exc}", file=sys.stderr)
        return 1
    except SizeGuardError as exc:
        print(f"gwl: size guard: {exc}", file=sys.stderr)
        return 3
    except (InputError, DatasetError, ValueError) as exc:
        print(f"gwl: input error: {exc}", file=sys.stderr)
        return 2
    except (OSError, MemoryError) as exc:
        print(f"gwl: resource error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
