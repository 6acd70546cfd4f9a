"""Command-line surface for the full pipeline.

Every subcommand reads `--config <file>` plus `--set key=value`
overrides; exit code 0 on success, nonzero with a single-line
machine-parseable error category on failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import detector as detector_mod
from . import nn, pipeline
from .config import load_config
from .embeddings import export_embeddings, import_embeddings
from .errors import AldasError, UsageError
from .fusion import FusionConfig, fuse, load_scores, restrict, sweep_weights
from .labeler import (load_bundle, read_edlf_csv, save_bundle, train_bundle,
                      write_edlf_csv)
from .manifest import parse_manifest, serialize_manifest, split_holdout
from .metrics import render_report
from .synth import SynthSpec, generate, make_weak_baseline


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="config file (section.key = value lines)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key")


def _cfg(args):
    return load_config(args.config, args.overrides)


def cmd_synth(args) -> int:
    cfg = _cfg(args)
    spec = SynthSpec(
        n_clips=cfg["synth.n_clips"], duration_s=cfg["synth.duration_s"],
        seed=cfg.stage_seed("synth"), breath_rate=cfg["synth.breath_rate"],
        pitch_anomaly_rate=cfg["synth.pitch_anomaly_rate"],
        quality_anomaly_rate=cfg["synth.quality_anomaly_rate"])
    m = generate(spec, args.out)
    if not args.no_split:
        m = split_holdout(m, cfg["split.holdout_fraction"], cfg.stage_seed("holdout"))
    manifest_path = Path(args.out) / "manifest.csv"
    serialize_manifest(m, manifest_path)
    if args.baseline:
        from .fusion import write_score_file
        write_score_file(make_weak_baseline(m, seed=cfg.stage_seed("baseline")),
                         args.baseline)
    print(f"wrote {len(m)} clips and {manifest_path}")
    return 0


def cmd_extract(args) -> int:
    cfg = _cfg(args)
    m = parse_manifest(args.manifest)
    if args.import_path:
        store = import_embeddings(args.import_path)
        missing = m.utt_ids() - store.entries.keys()
        if missing:
            from .errors import MissingUtterances
            raise MissingUtterances("imported store lacks: " + ", ".join(sorted(missing)))
    else:
        store = pipeline.extract_native(m, cfg)
    export_embeddings(store, args.out)
    print(f"wrote {len(store)} embeddings (dim {store.dim}) to {args.out}")
    return 0


def cmd_train_labelers(args) -> int:
    cfg = _cfg(args)
    m = parse_manifest(args.manifest)
    store = import_embeddings(args.store)
    opts = pipeline.labeler_opts_from_cfg(cfg)
    bundle, reports = train_bundle(store, m, opts)
    save_bundle(bundle, args.out)
    lines = []
    for feature, rep in reports.items():
        lines.append(f"[{feature}]")
        if rep.chosen is not None:
            lines.append(f"chosen = dropout={rep.chosen.dropout},lr={rep.chosen.lr}")
        for c in rep.per_candidate:
            lines.append(f"candidate dropout={c['dropout']} lr={c['lr']} "
                         f"mean_auc={c['mean_auc']:.4f}")
        if rep.fold_auc:
            lines.append("fold_auc = " + ",".join(f"{a:.4f}" for a in rep.fold_auc))
        lines.append("")
    (Path(args.out) / "cv_report.txt").write_text("\n".join(lines), encoding="utf-8")
    print(f"wrote bundle to {args.out}")
    return 0


def cmd_label(args) -> int:
    cfg = _cfg(args)
    bundle = load_bundle(args.bundle)
    store = import_embeddings(args.store)
    threshold = args.threshold if args.threshold is not None else cfg["labeler.threshold"]
    vectors = pipeline.label_store(bundle, store, hard=args.hard, threshold=threshold)
    write_edlf_csv(vectors, args.out)
    print(f"wrote {len(vectors)} EDLF vectors to {args.out}")
    return 0


def cmd_train_detector(args) -> int:
    cfg = _cfg(args)
    m = parse_manifest(args.manifest)
    vectors = read_edlf_csv(args.edlf)
    train_rows = m.by_split("train")
    missing = {r.utt_id for r in train_rows} - vectors.keys()
    if missing:
        from .errors import MissingUtterances
        raise MissingUtterances("EDLF file lacks: " + ", ".join(sorted(missing)))
    tr_vectors = {r.utt_id: vectors[r.utt_id] for r in train_rows}
    labels = {r.utt_id: int(r.spoof_label == "spoofed") for r in train_rows}
    det_cfg = nn.TrainConfig(lr=cfg["detector.lr"], l2_alpha=cfg["detector.l2_alpha"],
                             max_epochs=cfg["detector.max_epochs"],
                             patience=cfg["detector.patience"],
                             seed=cfg.stage_seed("detector"))
    det = detector_mod.train_detector(tr_vectors, labels, det_cfg)
    nn.save_model(det, args.out)
    print(f"wrote detector ({nn.param_count(det)} params) to {args.out}")
    return 0


def cmd_score(args) -> int:
    det = nn.load_model(args.detector)
    vectors = read_edlf_csv(args.edlf)
    scores = detector_mod.score_batch(det, vectors)
    from .fusion import write_score_file
    write_score_file(scores, args.out)
    print(f"wrote {len(scores)} scores to {args.out}")
    return 0


def cmd_fuse(args) -> int:
    cfg = _cfg(args)
    from .fusion import read_score_file, write_score_file
    aldas_scores = read_score_file(args.aldas)
    weight = args.weight if args.weight is not None else cfg["ensemble.weight_aldas"]
    if not 0.0 <= weight <= 1.0:
        raise UsageError(f"--weight {weight} out of range [0,1]")
    baseline = load_scores(args.baseline, polarity=args.polarity,
                           expected_utts=set(aldas_scores))
    baseline = restrict(baseline, aldas_scores.keys())
    fcfg = FusionConfig(weight_aldas=weight,
                        decision_threshold=cfg["ensemble.decision_threshold"])
    fused, decisions = fuse(aldas_scores, baseline, fcfg)
    write_score_file(fused, args.out)
    dec_path = Path(args.out).with_suffix(".decisions.tsv")
    dec_path.write_text(
        "\n".join(f"{u}\t{decisions[u]}" for u in sorted(decisions)) + "\n",
        encoding="utf-8")
    print(f"wrote fused scores to {args.out} and decisions to {dec_path}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _cfg(args)
    from .fusion import read_score_file
    m = parse_manifest(args.manifest)
    systems = {}
    for path in args.scores:
        scores = read_score_file(path)
        systems[Path(path).stem] = pipeline.evaluate_scores(
            scores, m, split=args.split, threshold=cfg["ensemble.decision_threshold"])
    report = render_report(systems, config_echo=cfg.echo())
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        print(report)
    return 0


def cmd_sweep(args) -> int:
    cfg = _cfg(args)
    from .fusion import read_score_file
    m = parse_manifest(args.manifest)
    aldas_scores = read_score_file(args.aldas)
    rows = m.by_split(args.split) if args.split != "all" else list(m)
    utts = {r.utt_id for r in rows} & aldas_scores.keys()
    labels = {r.utt_id: int(r.spoof_label == "spoofed") for r in rows if r.utt_id in utts}
    aldas_scores = {u: aldas_scores[u] for u in utts}
    baseline = restrict(load_scores(args.baseline, polarity=args.polarity), utts)
    try:
        start, stop, step = (float(x) for x in args.grid.split(":"))
    except ValueError:
        raise UsageError(f"--grid expects start:stop:step, got {args.grid!r}") from None
    grid, w = [], start
    while w <= stop + 1e-9:
        grid.append(round(w, 6))
        w += step
    table, best = sweep_weights(aldas_scores, baseline, labels, grid)
    print("weight\troc_auc\teer")
    for row in table:
        print(f"{row['weight']:g}\t{row['roc_auc']:.4f}\t{row['eer']:.4f}")
    print(f"best_weight\t{best:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aldas",
                                 description="Linguistic-feature auto-labeling and "
                                             "spoofed-audio detection pipeline")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic labeled corpus")
    p.add_argument("--out", required=True, help="output directory for WAVs + manifest.csv")
    p.add_argument("--no-split", action="store_true", help="skip the stratified holdout split")
    p.add_argument("--baseline", default=None,
                   help="also write a simulated weak baseline score file here")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="compute or import patch embeddings")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output ALDE file")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--native", action="store_true", default=True,
                   help="native projection front end (default)")
    g.add_argument("--import", dest="import_path", default=None,
                   help="validate and re-export an external ALDE file")
    _add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train-labelers", help="train the three feature labelers")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True, help="ALDE embedding file")
    p.add_argument("--out", required=True, help="output bundle directory")
    _add_common(p)
    p.set_defaults(func=cmd_train_labelers)

    p = sub.add_parser("label", help="predict EDLF vectors for every clip in a store")
    p.add_argument("--bundle", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True, help="output EDLF CSV")
    p.add_argument("--hard", action="store_true", help="hard (binary) labels")
    p.add_argument("--threshold", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train-detector", help="train the spoof-detection MLP")
    p.add_argument("--edlf", required=True, help="EDLF CSV from `label`")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output ALNN weight file")
    _add_common(p)
    p.set_defaults(func=cmd_train_detector)

    p = sub.add_parser("score", help="score EDLF vectors with a trained detector")
    p.add_argument("--detector", required=True)
    p.add_argument("--edlf", required=True)
    p.add_argument("--out", required=True, help="output TSV score file")
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fuse", help="weighted fusion of detector and baseline scores")
    p.add_argument("--aldas", required=True, help="detector score TSV")
    p.add_argument("--baseline", required=True, help="baseline score TSV")
    p.add_argument("--polarity", choices=["higher_is_spoof", "higher_is_genuine"],
                   default="higher_is_spoof")
    p.add_argument("--weight", type=float, default=None, help="ALDAS weight in [0,1]")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="metrics report over one or more score files")
    p.add_argument("--scores", required=True, action="append",
                   help="score TSV (repeatable for a comparative report)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", choices=["train", "test", "all"], default="test")
    p.add_argument("--out", default=None, help="report path (stdout if omitted)")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="metric table over a fusion weight grid")
    p.add_argument("--aldas", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--polarity", choices=["higher_is_spoof", "higher_is_genuine"],
                   default="higher_is_spoof")
    p.add_argument("--split", choices=["train", "test", "all"], default="test")
    p.add_argument("--grid", default="0:1:0.1")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AldasError as e:
        print(f"error: {e.category}: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: IoFailure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
