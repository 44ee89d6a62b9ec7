"""Subcommand front-end wiring the pipeline stages together.

Exit codes: 0 success, 1 validation error (bad flags/config/preconditions),
2 data error (parse failures, corrupt payloads, integrity findings).  Every
run writes a ``provenance.json`` beside its artifacts; timestamps live only
there, so artifact bytes are reproducible across identical runs.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import re
import shutil
import sys
from datetime import datetime, timezone

import numpy as np

from . import featfilter, gate, genmetrics, preprocess, stats
from .audit import audit as run_audit
from .audit import remove_duplicates
from .config import RunConfig, load_config
from .cubes import load_prediction_cubes, load_training_history
from .errors import DataError
from .features import load_feature_matrix
from .manifest import (ImageRecord, build_manifest, load_manifest,
                       split_by_stratum, stratum_counts, write_manifest)
from .phash import phash as compute_phash


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _resolve(path: str, root: str | None) -> str:
    if root is None or os.path.isabs(path):
        return path
    return os.path.join(root, path)


def _write_provenance(out_dir: str, command: str, argv: list[str], cfg: RunConfig,
                      inputs: dict, outputs: list[str]) -> None:
    doc = {
        "command": command,
        "argv": argv,
        "config_digest": cfg.digest(),
        "config": {**dataclasses.asdict(cfg),
                   "closing_iterations": list(cfg.closing_iterations)},
        "inputs": inputs,
        "outputs": sorted(outputs),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(os.path.join(out_dir, "provenance.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _provenance_note(command: str, cfg: RunConfig) -> str:
    return f"{command} config={cfg.digest()[:16]}"


def _sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# subcommands

def _cmd_preprocess(args, cfg: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    root = args.images_root or os.path.dirname(os.path.abspath(args.manifest))
    img_dir = os.path.join(args.out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)

    def run_one(rec):
        src = _resolve(rec.path, root)
        try:
            img = preprocess.load_image(src)
        except (OSError, ValueError) as exc:
            raise DataError(f"{rec.id}: cannot read {src}: {exc}") from None
        return preprocess.preprocess_image(img, cfg.closing_iterations, size=cfg.output_size)

    # per-image work is independent; results are consumed in manifest order,
    # so output bytes do not depend on the worker count
    workers = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, manifest.records))
    else:
        results = [run_one(rec) for rec in manifest.records]

    telemetry = []
    out_records = []
    for rec, result in zip(manifest.records, results):
        out_path = os.path.join(img_dir, f"{rec.id}.png")
        preprocess.save_png(result.image, out_path)
        telemetry.append({
            "id": rec.id,
            "tier": result.mask_result.accepted_tier,
            "area_fraction": result.mask_result.area_fraction,
            "constant_region": result.constant_region,
        })
        out_records.append(ImageRecord(
            id=rec.id, path=os.path.join("images", f"{rec.id}.png"), split=rec.split,
            source=rec.source, tumour_class=rec.tumour_class, plane=rec.plane))
    out_manifest = os.path.join(args.out_dir, "manifest.csv")
    write_manifest(build_manifest(out_records, provenance=_provenance_note("preprocess", cfg)),
                   out_manifest)
    tele_path = os.path.join(args.out_dir, "telemetry.jsonl")
    with open(tele_path, "w", encoding="utf-8") as fh:
        for entry in telemetry:
            fh.write(json.dumps(entry, separators=(",", ":")) + "\n")
    summary = preprocess.summarize_telemetry(telemetry)
    summary_path = os.path.join(args.out_dir, "telemetry_summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump({
            "n_images": summary.n_images,
            "tier_counts": summary.tier_counts,
            "mean_accepted_coverage": summary.mean_accepted_coverage,
            "constant_region_count": summary.constant_region_count,
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_provenance(args.out_dir, "preprocess", sys.argv[1:], cfg,
                      {"manifest": args.manifest},
                      [out_manifest, tele_path, summary_path, img_dir])
    return 0


def _cmd_audit(args, cfg: RunConfig) -> int:
    train = load_manifest(args.train)
    test = load_manifest(args.test)
    train_root = args.images_root or os.path.dirname(os.path.abspath(args.train))
    test_root = args.images_root or os.path.dirname(os.path.abspath(args.test))
    feats_train = load_feature_matrix(args.train_feats) if args.train_feats else None
    feats_test = load_feature_matrix(args.test_feats) if args.test_feats else None
    report = run_audit(
        train, test, feats_train, feats_test,
        base_dir=train_root, test_base_dir=test_root,
        phash_max_distance=cfg.phash_max_distance,
        cosine_threshold=cfg.cosine_threshold,
        include_dc_in_median=cfg.include_dc_in_median)
    os.makedirs(args.out_dir, exist_ok=True)
    report_path = os.path.join(args.out_dir, "audit_report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.to_json())
    removal_path = os.path.join(args.out_dir, "removals.txt")
    with open(removal_path, "w", encoding="utf-8") as fh:
        fh.write("".join(f"{rid}\n" for rid in report.removed))
    outputs = [report_path, removal_path]
    if args.remove:
        cleaned = remove_duplicates(train, report)
        cleaned_path = os.path.join(args.out_dir, "train_clean.csv")
        write_manifest(cleaned, cleaned_path)
        outputs.append(cleaned_path)
    _write_provenance(args.out_dir, "audit", sys.argv[1:], cfg,
                      {"train": args.train, "test": args.test}, outputs)
    if report.has_exact_overlap() and not args.remove:
        print(f"audit: {len(report.removed)} pixel-exact duplicate train images "
              f"({len(report.exact_duplicates)} evidence pairs); rerun with --remove",
              file=sys.stderr)
        return 2
    return 0


def _cmd_gate(args, cfg: RunConfig) -> int:
    candidates = load_manifest(args.candidates)
    root = args.images_root or os.path.dirname(os.path.abspath(args.candidates))
    ref_hashes: dict[tuple[str, str], set[int]] = {}
    for ref_path in args.refs or []:
        ref_manifest = load_manifest(ref_path)
        ref_root = args.images_root or os.path.dirname(os.path.abspath(ref_path))
        for rec in ref_manifest:
            img = preprocess.load_image(_resolve(rec.path, ref_root))
            ref_hashes.setdefault(rec.stratum(), set()).add(
                compute_phash(img, cfg.include_dc_in_median))
    os.makedirs(args.out_dir, exist_ok=True)
    decisions_path = os.path.join(args.out_dir, "gate_decisions.jsonl")
    accepted_records = []
    with open(decisions_path, "w", encoding="utf-8") as fh:
        for stratum, records in sorted(split_by_stratum(candidates).items()):
            seen: set[int] = set()
            refs = frozenset(ref_hashes.get(stratum, set()))
            pool_dir = os.path.join(args.out_dir, "pool", f"{stratum[0]}_{stratum[1]}")
            for rec in records:  # manifest order = ascending id = candidate index
                src = _resolve(rec.path, root)
                img = preprocess.load_image(src)
                decision = gate.gate_candidate(
                    rec.id, img, seen, refs,
                    mean_threshold=cfg.gate_mean_threshold,
                    nonzero_threshold=cfg.gate_nonzero_threshold,
                    phash_max_distance=cfg.phash_max_distance,
                    include_dc_in_median=cfg.include_dc_in_median)
                fh.write(decision.to_json() + "\n")
                if decision.verdict == "accept":
                    os.makedirs(pool_dir, exist_ok=True)
                    dst = os.path.join(pool_dir, os.path.basename(rec.path))
                    shutil.copyfile(src, dst)
                    accepted_records.append(ImageRecord(
                        id=rec.id, path=os.path.relpath(dst, args.out_dir),
                        split=rec.split, source=rec.source,
                        tumour_class=rec.tumour_class, plane=rec.plane))
    accepted_path = os.path.join(args.out_dir, "accepted.csv")
    write_manifest(build_manifest(accepted_records, provenance=_provenance_note("gate", cfg)),
                   accepted_path)
    _write_provenance(args.out_dir, "gate", sys.argv[1:], cfg,
                      {"candidates": args.candidates, "refs": args.refs or []},
                      [decisions_path, accepted_path])
    return 0


def _cmd_quota(args, cfg: RunConfig) -> int:
    manifest = load_manifest(args.manifest)
    counts = {f"{c}/{p}": n for (c, p), n in sorted(stratum_counts(manifest).items())}
    quotas, total = gate.quota(counts, args.rho if args.rho is not None else cfg.pool_multiplier)
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "quotas.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({"per_stratum": quotas, "total": total}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"quota total: {total}")
    _write_provenance(args.out_dir, "quota", sys.argv[1:], cfg,
                      {"manifest": args.manifest}, [out_path])
    return 0


def _cmd_filter(args, cfg: RunConfig) -> int:
    real = load_manifest(args.real)
    pool = load_manifest(args.pool)
    real_feats = load_feature_matrix(args.real_feats)
    pool_feats = load_feature_matrix(args.pool_feats)
    try:
        ratios = [int(r) for r in args.ratios.split(",") if r]
    except ValueError:
        raise _UsageError(f"--ratios must be comma-separated integers, got {args.ratios!r}")
    result = featfilter.build_filtered_sets(
        real, real_feats, pool, pool_feats, ratios,
        quantile=cfg.filter_quantile, max_components=cfg.pca_max_components,
        metric=cfg.selection_metric)
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = []
    for ratio, manifest in sorted(result.manifests.items()):
        path = os.path.join(args.out_dir, f"filtered_ratio{ratio}.csv")
        write_manifest(manifest, path)
        outputs.append(path)
    report_path = os.path.join(args.out_dir, "filter_report.csv")
    featfilter.write_filter_report_csv(result.reports, report_path)
    outputs.append(report_path)
    audit_path = os.path.join(args.out_dir, "threshold_audit.json")
    with open(audit_path, "w", encoding="utf-8") as fh:
        json.dump([{"stratum": a.stratum, "n_real": a.n_real,
                    "n_candidates": a.n_candidates, "rejections": a.rejections}
                   for a in result.audits], fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(audit_path)
    _write_provenance(args.out_dir, "filter", sys.argv[1:], cfg,
                      {"real": args.real, "pool": args.pool}, outputs)
    return 0


def _cmd_select_checkpoint(args, cfg: RunConfig) -> int:
    snapshots = genmetrics.load_snapshot_csv(args.snapshots)
    if not snapshots:
        raise DataError(f"{args.snapshots}: no snapshot rows")
    selected = genmetrics.select_checkpoint(snapshots, tie_margin=cfg.score_tie_margin)
    os.makedirs(args.out_dir, exist_ok=True)
    table_path = os.path.join(args.out_dir, "checkpoint_selection.csv")
    genmetrics.write_snapshot_table(snapshots, selected, table_path)
    print(f"selected: {selected.generator} kimg={selected.kimg} fid={selected.fid} "
          f"S={genmetrics.composite_score(selected):.6g}")
    _write_provenance(args.out_dir, "select-checkpoint", sys.argv[1:], cfg,
                      {"snapshots": args.snapshots}, [table_path])
    return 0


def _cmd_genmetrics(args, cfg: RunConfig) -> int:
    real = load_feature_matrix(args.real_feats)
    gen = load_feature_matrix(args.gen_feats)
    fid_value = genmetrics.fid(real, gen)
    kid_value = genmetrics.kid(real, gen, subsets=cfg.kid_subsets,
                               subset_max=cfg.kid_subset_max, rng_seed=cfg.rng_seed)
    precision, recall = genmetrics.precision_recall(real, gen, k=cfg.knn_neighbours)
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "genmetrics.json")
    doc = {"generator": args.generator, "kimg": args.kimg,
           "fid": fid_value, "kid": kid_value,
           "precision": precision, "recall": recall,
           "n_real": real.n, "n_generated": gen.n}
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"fid={fid_value:.6g} kid={kid_value:.6g} precision={precision:.6g} recall={recall:.6g}")
    _write_provenance(args.out_dir, "genmetrics", sys.argv[1:], cfg,
                      {"real_feats": args.real_feats, "gen_feats": args.gen_feats}, [out_path])
    return 0


def _cmd_eval(args, cfg: RunConfig) -> int:
    cubes = load_prediction_cubes(args.cubes)
    if args.baseline_condition not in cubes:
        raise DataError(f"baseline condition {args.baseline_condition!r} not in "
                        f"{sorted(cubes)}")
    baseline = cubes.pop(args.baseline_condition)
    if not cubes:
        raise DataError("no comparison conditions besides the baseline")
    results = stats.compare_conditions(
        baseline, cubes,
        resamples=cfg.permutation_resamples,
        bootstrap_resamples=cfg.bootstrap_resamples,
        level=cfg.ci_level, alpha=cfg.holm_alpha,
        rng_seed=cfg.rng_seed, classifier=args.classifier)
    os.makedirs(args.out_dir, exist_ok=True)
    primary_path = os.path.join(args.out_dir, "eval_results.csv")
    stats.write_eval_csv(results, primary_path, primary_only=True)
    full_path = os.path.join(args.out_dir, "eval_results_full.csv")
    stats.write_eval_csv(results, full_path, primary_only=False)
    stability_path = os.path.join(args.out_dir, "seed_stability.json")
    stability = {}
    for label, cube in [(args.baseline_condition, baseline)] + sorted(cubes.items()):
        if cube.n_seeds >= 2:
            mean, sd = stats.seed_stability(cube)
            stability[label] = {"mean": mean, "sd": sd}
    with open(stability_path, "w", encoding="utf-8") as fh:
        json.dump(stability, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_provenance(args.out_dir, "eval", sys.argv[1:], cfg,
                      {"cubes": args.cubes, "baseline": args.baseline_condition},
                      [primary_path, full_path, stability_path])
    return 0


def _cmd_vlm_stats(args, cfg: RunConfig) -> int:
    rows = stats.read_vlm_audit_csv(args.audit_csv)
    result = stats.gated_vlm_stats(rows, level=cfg.ci_level)
    os.makedirs(args.out_dir, exist_ok=True)
    out_path = os.path.join(args.out_dir, "vlm_stats.json")
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({
            "n_images": result.n_images,
            "class_gate_accuracy": result.class_gate_accuracy,
            "plane_gate_accuracy": result.plane_gate_accuracy,
            "n_gated": result.n_gated,
            "gated_correct": result.gated_correct,
            "gated_accuracy": result.gated_accuracy,
            "wilson_low": result.wilson_low,
            "wilson_high": result.wilson_high,
            "binomial_p": result.binomial_p,
            "per_class_gated": {k: {"correct": v[0], "gated": v[1], "accuracy": v[2]}
                                for k, v in result.per_class_gated.items()},
        }, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"gated accuracy: {result.gated_correct}/{result.n_gated} = "
          f"{100 * result.gated_accuracy:.2f}% "
          f"(Wilson {100 * result.wilson_low:.2f}-{100 * result.wilson_high:.2f}%, "
          f"binomial p={result.binomial_p:.3g})")
    _write_provenance(args.out_dir, "vlm-stats", sys.argv[1:], cfg,
                      {"audit_csv": args.audit_csv}, [out_path])
    return 0


def _load_history_dir(path: str, condition: str) -> list:
    histories = []
    for name in sorted(os.listdir(path)):
        if not name.endswith(".jsonl"):
            continue
        m = re.search(r"(\d+)", name)
        if m is None:
            raise DataError(f"{path}/{name}: cannot infer seed from filename")
        histories.append(load_training_history(os.path.join(path, name),
                                               condition=condition, seed=int(m.group(1))))
    if not histories:
        raise DataError(f"{path}: no .jsonl training histories found")
    return histories


def _cmd_efficiency(args, cfg: RunConfig) -> int:
    baseline = _load_history_dir(args.baseline, "baseline")
    condition = _load_history_dir(args.condition, args.condition_name)
    base_summary = stats.efficiency_summary(baseline, args.mode, args.n_real_rows)
    cond_summary = stats.efficiency_summary(condition, args.mode, args.n_real_rows)
    comparison = stats.compare_efficiency(base_summary, cond_summary)
    os.makedirs(args.out_dir, exist_ok=True)
    csv_path = os.path.join(args.out_dir, "efficiency.csv")
    header = "condition,mode,mean,sd,baseline_mean,baseline_sd,reduction_pct,p_sign_flip"
    line = (f"{args.condition_name},{args.mode},{cond_summary.mean:.6g},{cond_summary.sd:.6g},"
            f"{base_summary.mean:.6g},{base_summary.sd:.6g},"
            f"{comparison.reduction_pct:.6g},{comparison.p_sign_flip:.6g}")
    with open(csv_path, "wb") as fh:
        fh.write((header + "\n" + line + "\n").encode("utf-8"))
    per_seed_path = os.path.join(args.out_dir, "efficiency_per_seed.json")
    with open(per_seed_path, "w", encoding="utf-8") as fh:
        json.dump({"baseline": {str(k): v for k, v in sorted(base_summary.per_seed.items())},
                   args.condition_name: {str(k): v for k, v in sorted(cond_summary.per_seed.items())}},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"{args.condition_name}: {cond_summary.mean:.4g} vs baseline {base_summary.mean:.4g} "
          f"({comparison.reduction_pct:.1f}% reduction, sign-flip p={comparison.p_sign_flip:.4f})")
    _write_provenance(args.out_dir, "efficiency", sys.argv[1:], cfg,
                      {"baseline": args.baseline, "condition": args.condition},
                      [csv_path, per_seed_path])
    return 0


def _cmd_report(args, cfg: RunConfig) -> int:
    digests = {}
    for dirpath, _, filenames in os.walk(args.out_dir):
        for name in sorted(filenames):
            if name in ("provenance.json", "report.json"):
                continue
            full = os.path.join(dirpath, name)
            digests[os.path.relpath(full, args.out_dir)] = _sha256_file(full)
    report_path = os.path.join(args.out_dir, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump({"artifacts": dict(sorted(digests.items()))}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"report: {len(digests)} artifacts digested")
    _write_provenance(args.out_dir, "report", sys.argv[1:], cfg, {"dir": args.out_dir},
                      [report_path])
    return 0


# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    parser = _Parser(prog="augqa", description=__doc__)
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--seed", type=int, help="override rng_seed")
    parser.add_argument("--threads", type=int, help="override thread count (0 = auto)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="harmonize a manifest of raw images")
    p.add_argument("--manifest", required=True)
    p.add_argument("--images-root")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_preprocess)

    p = sub.add_parser("audit", help="train/test duplicate and near-duplicate audit")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train-feats")
    p.add_argument("--test-feats")
    p.add_argument("--images-root")
    p.add_argument("--remove", action="store_true",
                   help="write a cleaned train manifest instead of failing")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("gate", help="blank/duplicate screening of synthetic candidates")
    p.add_argument("--candidates", required=True)
    p.add_argument("--refs", nargs="*", help="real reference manifests for pHash dedup")
    p.add_argument("--images-root")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_gate)

    p = sub.add_parser("quota", help="per-stratum candidate quotas (half-even rounding)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_quota)

    p = sub.add_parser("filter", help="Mahalanobis gate + farthest-point ratio sets")
    p.add_argument("--real", required=True)
    p.add_argument("--real-feats", required=True)
    p.add_argument("--pool", required=True)
    p.add_argument("--pool-feats", required=True)
    p.add_argument("--ratios", default="1,2")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("select-checkpoint", help="tier-gated composite-score selection")
    p.add_argument("--snapshots", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_select_checkpoint)

    p = sub.add_parser("genmetrics", help="FID/KID/precision/recall over feature files")
    p.add_argument("--real-feats", required=True)
    p.add_argument("--gen-feats", required=True)
    p.add_argument("--generator", default="")
    p.add_argument("--kimg", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_genmetrics)

    p = sub.add_parser("eval", help="paired permutation tests with Holm correction")
    p.add_argument("--cubes", required=True, help="prediction-cube CSV with all conditions")
    p.add_argument("--baseline-condition", required=True)
    p.add_argument("--classifier", default="")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("vlm-stats", help="gated VLM audit statistics")
    p.add_argument("--audit-csv", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_vlm_stats)

    p = sub.add_parser("efficiency", help="selected-checkpoint effort vs baseline")
    p.add_argument("--baseline", required=True, help="directory of baseline history JSONLs")
    p.add_argument("--condition", required=True, help="directory of condition history JSONLs")
    p.add_argument("--condition-name", default="condition")
    p.add_argument("--mode", choices=("epoch", "real_epoch"), required=True)
    p.add_argument("--n-real-rows", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_efficiency)

    p = sub.add_parser("report", help="digest artifacts in an output directory")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, overrides={
            "rng_seed": args.seed, "threads": args.threads})
        if hasattr(args, "out_dir"):
            os.makedirs(args.out_dir, exist_ok=True)
        return args.func(args, cfg)
    except (_UsageError, ValueError) as exc:
        print(f"augqa: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"augqa: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"augqa: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
