"""Command line: ``tsencode keygen|encode|audit|inspect``.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Logs go to stderr; the
fingerprint, encode summary and inspect CSVs go to stdout.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import core, pipeline
from .errors import EncodingError, FeatureLookupError
from .evaluation.audit import AuditConfig, audit_leakage, write_report

log = logging.getLogger("tsencode")


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _csv_list(s: str) -> list[str]:
    items = [x.strip() for x in s.split(",") if x.strip()]
    if not items:
        raise argparse.ArgumentTypeError("expected a comma-separated list")
    return items


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in _csv_list(s)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsencode", description="Irreversible segment-wise time-series encoding and leakage audits.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    k = sub.add_parser("keygen", help="materialize an encoding key from a seed")
    k.add_argument("--method", required=True, choices=["quantum", "random-projection"])
    k.add_argument("--segment-len", required=True, type=_positive_int)
    k.add_argument("--seed", required=True, type=int)
    k.add_argument("--layers", type=_nonneg_int, help=f"quantum only (default {pipeline.DEFAULT_LAYERS})")
    k.add_argument("--cnot", choices=sorted(pipeline.CNOT_PATTERNS), help="quantum only (default ring)")
    k.add_argument("--no-normalize", action="store_true", help="skip per-feature min-max scaling before encoding")
    k.add_argument("--out", required=True, type=Path)

    e = sub.add_parser("encode", help="encode a dataset directory with a key")
    e.add_argument("--key", required=True, type=Path)
    e.add_argument("--in", dest="input", required=True, type=Path)
    e.add_argument("--out", required=True, type=Path)
    e.add_argument("--pad-zero", action="store_true", help="zero-pad the last segment when n does not divide T")
    e.add_argument("--workers", type=_positive_int, default=1)
    e.add_argument("--stats", type=Path, help="manifest.json whose normalization stats to reuse")

    a = sub.add_parser("audit", help="probe reference-model embeddings for leaked attributes")
    a.add_argument("--original", required=True, type=Path)
    a.add_argument("--encoded", nargs="+", default=[], type=Path)
    a.add_argument("--attrs", required=True, type=_csv_list)
    a.add_argument("--seeds", required=True, type=_int_list)
    a.add_argument("--out", required=True, type=Path)
    a.add_argument("--hidden-dim", type=_positive_int, default=AuditConfig.hidden_dim)
    a.add_argument("--epochs", type=_nonneg_int, default=AuditConfig.epochs)
    a.add_argument("--probe-epochs", type=_nonneg_int, default=AuditConfig.probe_epochs)
    a.add_argument("--mi-k", type=_positive_int, default=AuditConfig.mi_k)

    i = sub.add_parser("inspect", help="per-feature statistics or an averaged summary series")
    i.add_argument("--in", dest="input", required=True, type=Path)
    i.add_argument("--feature", help="restrict output to one feature")
    i.add_argument("--summary", action="store_true", help="emit the across-example mean series as CSV (T rows)")
    i.add_argument("--task-label", type=int, choices=[0, 1], help="only examples with this task label")
    return p


def cmd_keygen(args, parser) -> int:
    quantum = args.method == "quantum"
    if not quantum and (args.layers is not None or args.cnot is not None):
        parser.error("--layers and --cnot apply only to --method quantum")
    if quantum and args.segment_len > pipeline.qsim.MAX_WIRES:
        parser.error(f"--segment-len must be <= {pipeline.qsim.MAX_WIRES} for quantum keys")
    key = pipeline.generate_key(
        args.method,
        args.segment_len,
        args.seed,
        layers=pipeline.DEFAULT_LAYERS if args.layers is None else args.layers,
        cnot=args.cnot or "ring",
        normalize=not args.no_normalize,
    )
    fp = pipeline.save_key(key, args.out)
    log.info("wrote %s key (n=%d) to %s", key.method, key.segment_len, args.out)
    print(fp)
    return 0


def cmd_encode(args, parser) -> int:
    key = pipeline.load_key(args.key)
    stats = None
    if args.stats is not None:
        try:
            stats = core.NormStats.from_json(json.loads(args.stats.read_text())["normalization_stats"])
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as e:
            raise core.IngestionError(f"{args.stats}: no usable normalization_stats ({e})") from e
    manifest = pipeline.encode_dataset(args.input, key, args.out, stats=stats, pad_zero=args.pad_zero, workers=args.workers)
    print(f"examples={manifest['n_examples']}")
    print(f"clamped_values={manifest['clamped_values']}")
    print(f"key_fingerprint={manifest['key_fingerprint']}")
    return 0


def _variant_names(original: Path, encoded: list[Path]) -> dict[str, Path]:
    out = {"original": original}
    for p in encoded:
        name = p.name or str(p)
        base, n = name, 2
        while name in out:
            name = f"{base}_{n}"
            n += 1
        out[name] = p
    return out


def cmd_audit(args, parser) -> int:
    cfg = AuditConfig(hidden_dim=args.hidden_dim, epochs=args.epochs, probe_epochs=args.probe_epochs, mi_k=args.mi_k)
    reports = audit_leakage(_variant_names(args.original, args.encoded), args.attrs, args.seeds, cfg)
    write_report(reports, args.out)
    for name, r in reports.items():
        probes = ", ".join(f"{a}={np.mean(v):.3f}" for a, v in r.probe_auroc.items())
        log.info("%s: task AUROC %.3f; probe AUROC %s", name, np.mean(r.task_auroc), probes)
    return 0


def cmd_inspect(args, parser) -> int:
    ds = core.read_dataset(args.input)
    if args.task_label is not None:
        keep = [(i, s) for i, s in ds.examples if i in ds.labels and ds.labels[i].task_label == args.task_label]
        if not keep:
            raise EncodingError(f"no examples with task label {args.task_label}")
        ds = core.Dataset(tuple(keep), {i: ds.labels[i] for i, _ in keep})
    names = list(ds.feature_names)
    X = ds.stack()
    if args.feature is not None:
        if args.feature not in names:
            raise FeatureLookupError(f"unknown feature {args.feature!r}; available: {', '.join(names)}")
        idx = names.index(args.feature)
        names, X = [args.feature], X[:, idx : idx + 1, :]
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.summary:
        w.writerow(names)
        for row in X.mean(axis=0).T:
            w.writerow([core.format_float(v) for v in row])
        return 0
    w.writerow(["feature", "min", "max", "mean", "std"])
    for f, name in enumerate(names):
        v = X[:, f, :]
        w.writerow([name, *(core.format_float(s) for s in (v.min(), v.max(), v.mean(), v.std()))])
    return 0


COMMANDS = {"keygen": cmd_keygen, "encode": cmd_encode, "audit": cmd_audit, "inspect": cmd_inspect}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return COMMANDS[args.command](args, parser)
    except EncodingError as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
