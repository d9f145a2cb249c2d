"""Command-line entry point.

Subcommands: gen-csl, analyze, distinguish, verify-theorems, markov, train,
ablate.  Exit codes: 0 success, 1 verification failure, 2 usage error,
3 I/O error.  Every error path prints a single line starting with
``error:`` to stderr.

Config files for train/ablate are flat ``key = value`` text ('#' starts a
comment).  Keys are the TigtConfig and TrainConfig field names plus the
dataset keys nodes, skips, copies, dataset_seed; list values are
comma-separated.  Command-line flags override file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from collections import Counter
from pathlib import Path

from . import graphs as graphs_mod
from . import reporting
from .errors import ParseError, TopoformerError
from .expressiveness import (
    distinguish_by_biconnectivity,
    distinguish_by_cycles,
    rrwp_convergence_report,
    stationary,
    wl1_distinguishes,
    wl3_distinguishes,
)
from .graphs import Graph, read_graph, write_graph
from .model import TigtConfig
from .topology import (
    articulation_vertices,
    bridges,
    connected_components,
    cycle_basis,
    cycle_length_histogram,
    euler_invariant,
)
from .training import CSL_SKIPS, TrainConfig, run_ablation_suite, train_csl

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise TopoformerError(f"expected a comma-separated integer list, got {text!r}") from None


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise TopoformerError(f"expected a comma-separated number list, got {text!r}") from None


def _coerce(raw: str, target_type):
    if target_type is bool:
        low = raw.strip().lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise TopoformerError(f"expected a boolean, got {raw!r}")
    if target_type is int:
        return int(raw)
    if target_type is float:
        return float(raw)
    return raw.strip()


_DATASET_KEYS = {"nodes": int, "skips": "int_list", "copies": int, "dataset_seed": int}


def read_config_file(path) -> dict:
    """Parse a flat key=value config into model/train/dataset field dicts."""
    model_fields = {f.name: f.type for f in dataclasses.fields(TigtConfig)}
    train_fields = {f.name: f.type for f in dataclasses.fields(TrainConfig)}
    out = {"model": {}, "train": {}, "dataset": {}}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        # a bad --config argument is a usage problem, not an I/O failure
        raise TopoformerError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise TopoformerError(f"config line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        try:
            if key in model_fields:
                ann = model_fields[key]
                types = {"int": int, "float": float, "str": str, "bool": bool}
                out["model"][key] = _coerce(raw, types.get(str(ann), str))
            elif key == "seeds":
                out["train"]["seeds"] = tuple(_parse_int_list(raw))
            elif key == "split":
                vals = _parse_float_list(raw)
                if len(vals) != 3:
                    raise TopoformerError("split needs exactly three fractions")
                out["train"]["split"] = tuple(vals)
            elif key in train_fields:
                types = {"int": int, "float": float}
                out["train"][key] = _coerce(raw, types.get(str(train_fields[key]), str))
            elif key in _DATASET_KEYS:
                kind = _DATASET_KEYS[key]
                out["dataset"][key] = (
                    _parse_int_list(raw) if kind == "int_list" else _coerce(raw, kind)
                )
            else:
                raise TopoformerError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise TopoformerError(f"config line {lineno}: {exc}") from None
    return out


# ----------------------------------------------------------------------------
# small built-in graphs used by the theorem checks


def _cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def _two_triangles() -> Graph:
    return Graph(6, ((0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)))


def _bowtie() -> Graph:
    return Graph(5, ((0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)))


def _c5_with_chord() -> Graph:
    return Graph(5, ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (0, 2)))


def _record(theorem: int, pair: str, expected: str, observed: dict, ok: bool) -> dict:
    return {
        "schema_version": 1,
        "theorem": theorem,
        "pair": pair,
        "expected": expected,
        "observed": observed,
        "pass": bool(ok),
    }


def _check_theorem_1() -> list[dict]:
    records = []
    pairs = [
        ("CSL(41,2) vs CSL(41,3)", graphs_mod.generate_csl(41, 2), graphs_mod.generate_csl(41, 3)),
        ("C6 vs two triangles", _cycle_graph(6), _two_triangles()),
    ]
    for name, g, h in pairs:
        plain = wl1_distinguishes(g, h)
        augmented = wl1_distinguishes(g, h, augmented=True)
        records.append(
            _record(
                1,
                name,
                "plain 1-WL fails, clique-augmented 1-WL distinguishes",
                {"plain_wl_distinguishes": plain, "augmented_wl_distinguishes": augmented},
                (not plain) and augmented,
            )
        )
    return records


def _check_theorem_2() -> list[dict]:
    rook = graphs_mod.generate_rook_4x4()
    shri = graphs_mod.generate_shrikhande()
    wl3 = wl3_distinguishes(rook, shri)
    verdict = distinguish_by_cycles(rook, shri)
    return [
        _record(
            2,
            "rook 4x4 vs Shrikhande",
            "3-WL fails, cycle-class comparison distinguishes",
            {
                "wl3_distinguishes": wl3,
                "cycles_distinguished": verdict.distinguished,
                "witness": verdict.witness,
            },
            (not wl3) and verdict.distinguished,
        )
    ]


def _check_theorem_3() -> list[dict]:
    verdict = distinguish_by_biconnectivity(_bowtie(), _c5_with_chord())
    return [
        _record(
            3,
            "bowtie vs C5 plus chord",
            "deletion profiles distinguish the biconnected graph",
            {"distinguished": verdict.distinguished, "witness": verdict.witness},
            verdict.distinguished,
        )
    ]


def _check_theorem_4() -> list[dict]:
    records = []
    cases = [
        ("C3 walk, K=30", _cycle_graph(3), 30, 1e-6),
        ("CSL(41,2) walk, K=50", graphs_mod.generate_csl(41, 2), 50, 0.05),
    ]
    for name, g, steps, final_bound in cases:
        report = rrwp_convergence_report(g, steps)
        pi = stationary(g).pi
        uniform_err = float(abs(pi - 1.0 / g.num_nodes).max())
        ok = (
            report.fitted_rate < 1.0
            and report.deviations[-1] < final_bound
            and report.deviations[-1] < report.deviations[0]
            and uniform_err < 1e-12
        )
        records.append(
            _record(
                4,
                name,
                "geometric decay to the degree-proportional stationary distribution",
                {
                    "fitted_rate": report.fitted_rate,
                    "final_deviation": report.deviations[-1],
                    "stationary_uniform_error": uniform_err,
                },
                ok,
            )
        )
    return records


_THEOREM_CHECKS = {1: _check_theorem_1, 2: _check_theorem_2, 3: _check_theorem_3, 4: _check_theorem_4}


# ----------------------------------------------------------------------------
# subcommand handlers


def _cmd_gen_csl(args) -> int:
    skips = _parse_int_list(args.skips)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    samples = graphs_mod.generate_csl_dataset(args.nodes, skips, args.copies, args.seed)
    per_class_index: Counter = Counter()
    entries = []
    for sample in samples:
        copy_idx = per_class_index[sample.label]
        per_class_index[sample.label] += 1
        name = f"csl_n{args.nodes}_s{sample.skip}_{copy_idx:03d}.txt"
        write_graph(sample.graph, out_dir / name)
        entries.append({"graph_path": name, "label": sample.label, "class_skip": sample.skip})
    manifest = {
        "schema_version": 1,
        "nodes": args.nodes,
        "skips": skips,
        "copies": args.copies,
        "seed": args.seed,
        "graphs": entries,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(entries)} graphs and manifest.json to {out_dir}")
    return EXIT_OK


def _analysis_payload(g: Graph) -> dict:
    basis = cycle_basis(g)
    return {
        "schema_version": 1,
        "nodes": g.num_nodes,
        "edges": g.num_edges,
        "components": len(connected_components(g)),
        "cycle_basis_size": len(basis),
        "euler_invariant": euler_invariant(g),
        "cycle_length_histogram": {str(k): v for k, v in cycle_length_histogram(basis).items()},
        "articulation_vertices": articulation_vertices(g),
        "bridges": [list(e) for e in bridges(g)],
    }


def _cmd_analyze(args) -> int:
    payload = _analysis_payload(read_graph(args.graph_file))
    text = json.dumps(payload, indent=2)
    print(text)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "analysis.json").write_text(text + "\n")
        histogram = {int(k): v for k, v in payload["cycle_length_histogram"].items()}
        reporting.save_cycle_histogram(histogram, out_dir / "cycle_length_histogram.png")
    return EXIT_OK


def _cmd_distinguish(args) -> int:
    g = read_graph(args.graph_a)
    h = read_graph(args.graph_b)
    if args.method == "cycles":
        verdict = distinguish_by_cycles(g, h, max_len=args.max_len)
        distinguished, witness = verdict.distinguished, verdict.witness
    elif args.method == "biconnectivity":
        verdict = distinguish_by_biconnectivity(g, h)
        distinguished, witness = verdict.distinguished, verdict.witness
    elif args.method in ("wl1", "wl1-clique"):
        distinguished = wl1_distinguishes(g, h, augmented=args.method == "wl1-clique")
        witness = "stable color histograms " + ("differ" if distinguished else "agree")
    else:
        distinguished = wl3_distinguishes(g, h)
        witness = "stable pair-color histograms " + ("differ" if distinguished else "agree")
    print(
        json.dumps(
            {
                "schema_version": 1,
                "method": args.method,
                "distinguished": distinguished,
                "witness": witness,
            }
        )
    )
    return EXIT_OK


def _cmd_verify_theorems(args) -> int:
    selected = sorted(_THEOREM_CHECKS) if args.only is None else [args.only]
    records = []
    passed_theorems = []
    for theorem in selected:
        theorem_records = _THEOREM_CHECKS[theorem]()
        records.extend(theorem_records)
        passed_theorems.append(all(r["pass"] for r in theorem_records))
    for record in records:
        print(json.dumps(record))
    total = len(selected)
    good = sum(passed_theorems)
    print(f"{good}/{total} theorems verified")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "verdicts.json").write_text(json.dumps(records, indent=2) + "\n")
    return EXIT_OK if good == total else EXIT_VERIFICATION


def _cmd_markov(args) -> int:
    g = read_graph(args.graph_file)
    report = rrwp_convergence_report(g, args.steps)
    payload = {
        "schema_version": 1,
        "steps": args.steps,
        "deviations": list(report.deviations),
        "fitted_rate": report.fitted_rate,
        "envelope_constant": report.envelope_constant,
        "stationary": stationary(g).pi.tolist(),
    }
    print(json.dumps(payload, indent=2))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "markov.json").write_text(json.dumps(payload, indent=2) + "\n")
        reporting.save_convergence_plot(
            report.deviations, report.fitted_rate, report.envelope_constant,
            out_dir / "markov_decay.png",
        )
    return EXIT_OK


def _load_run_inputs(args):
    file_conf = read_config_file(args.config)
    if args.seeds is not None:
        file_conf["train"]["seeds"] = tuple(_parse_int_list(args.seeds))
    if args.epochs is not None:
        file_conf["train"]["epochs"] = args.epochs
    model_config = TigtConfig(**file_conf["model"])
    train_config = TrainConfig(**file_conf["train"])
    ds = file_conf["dataset"]
    nodes = ds.get("nodes", 41)
    skips = ds.get("skips", list(CSL_SKIPS))
    copies = ds.get("copies", 15)
    dataset_seed = ds.get("dataset_seed", 0)
    dataset = graphs_mod.generate_csl_dataset(nodes, skips, copies, dataset_seed)
    info = {"nodes": nodes, "skips": list(skips), "copies": copies, "seed": dataset_seed}
    return model_config, train_config, dataset, info


def _cmd_train(args) -> int:
    model_config, train_config, dataset, info = _load_run_inputs(args)
    report = train_csl(model_config, train_config, dataset, info, workers=args.workers)
    payload = report.to_dict()
    print(json.dumps(payload, indent=2))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
        reporting.save_training_curves(report, out_dir / "training_curves.png")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    model_config, train_config, dataset, _ = _load_run_inputs(args)
    table = run_ablation_suite(model_config, train_config, dataset, workers=args.workers)
    csv_text = table.to_csv()
    print(csv_text, end="")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "ablation.csv").write_text(csv_text)
        (out_dir / "ablation.json").write_text(json.dumps(table.to_dict(), indent=2) + "\n")
        reporting.save_ablation_chart(table, out_dir / "ablation.png")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topoformer",
        description="Cycle-basis graph analysis, expressiveness checks, and CSL training.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-csl", help="generate a CSL dataset as edge-list files")
    p.add_argument("--nodes", type=int, default=41)
    p.add_argument("--skips", default=",".join(str(s) for s in CSL_SKIPS))
    p.add_argument("--copies", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_gen_csl)

    p = sub.add_parser("analyze", help="topology report for one graph file")
    p.add_argument("graph_file")
    p.add_argument("--out", default=None, help="directory for analysis.json and the histogram figure")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("distinguish", help="run one isomorphism-separation method on two graphs")
    p.add_argument("graph_a")
    p.add_argument("graph_b")
    p.add_argument(
        "--method",
        choices=["cycles", "biconnectivity", "wl1", "wl1-clique", "wl3"],
        default="cycles",
    )
    p.add_argument("--max-len", type=int, default=None, help="cycle length cap for --method cycles")
    p.set_defaults(handler=_cmd_distinguish)

    p = sub.add_parser("verify-theorems", help="run the four built-in expressiveness checks")
    p.add_argument("--only", type=int, choices=[1, 2, 3, 4], default=None)
    p.add_argument("--out", default=None, help="directory for verdicts.json")
    p.set_defaults(handler=_cmd_verify_theorems)

    p = sub.add_parser("markov", help="random-walk convergence report for one graph file")
    p.add_argument("graph_file")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--out", default=None, help="directory for markov.json and the decay figure")
    p.set_defaults(handler=_cmd_markov)

    for name, handler, description in (
        ("train", _cmd_train, "train on CSL and write a run report"),
        ("ablate", _cmd_ablate, "run the ablation suite and write a CSV table"),
    ):
        p = sub.add_parser(name, help=description)
        p.add_argument("--config", required=True)
        p.add_argument("--seeds", default=None, help="override the config seed list")
        p.add_argument("--epochs", type=int, default=None, help="override the config epoch count")
        p.add_argument("--workers", type=int, default=1, help="parallel seed jobs")
        p.add_argument("--out", default=None, help="directory for reports and figures")
        p.set_defaults(handler=handler)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed the usage message
        return EXIT_USAGE if exc.code not in (0,) else EXIT_OK
    try:
        return args.handler(args)
    except (ParseError, FileNotFoundError, IsADirectoryError, PermissionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TopoformerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
