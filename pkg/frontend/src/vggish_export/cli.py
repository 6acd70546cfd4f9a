"""Command-line entry point for the embedding exporter."""

from __future__ import annotations

import argparse
import sys

from .errors import ExportError
from .export import ExportJob, export
from .model import save_random_checkpoint


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vggish-export",
                                 description="Batch audio-embedding exporter "
                                             "(ALDE output)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export", help="embed a manifest's clips into an ALDE file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--batch", type=int, default=32, metavar="N")
    p.add_argument("--weights", default=None,
                   help="model checkpoint (defaults to $VGGISH_EXPORT_WEIGHTS)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("init-weights",
                       help="write a seeded random checkpoint (testing only)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_init_weights)
    return ap


def cmd_export(args) -> int:
    job = ExportJob(manifest_path=args.manifest, out_path=args.out,
                    batch_size=args.batch, weights_path=args.weights)
    n = export(job)
    print(f"exported {n} clips to {args.out}")
    return 0


def cmd_init_weights(args) -> int:
    save_random_checkpoint(args.out, seed=args.seed)
    print(f"wrote random checkpoint to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ExportError as e:
        print(f"error: {e.category}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
