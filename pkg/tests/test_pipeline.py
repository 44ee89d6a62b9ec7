"""End-to-end CLI chain on a fixture corpus, run twice: every artifact byte
outside provenance.json must be identical between runs."""
import hashlib
import json
import os

import numpy as np

from augqa.cli import main
from augqa.features import FeatureMatrix, write_feature_matrix
from augqa.manifest import ImageRecord, build_manifest, load_manifest, write_manifest
from augqa.preprocess import save_png
from conftest import disc_image


def digest_tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for name in sorted(files):
            if name == "provenance.json":
                continue
            p = os.path.join(dirpath, name)
            out[os.path.relpath(p, root)] = hashlib.sha256(open(p, "rb").read()).hexdigest()
    return out


def build_inputs(base):
    """Raw corpus, manifests, feature files, cubes, histories, VLM audit."""
    raw = base / "raw"
    raw.mkdir(parents=True)
    classes = ("glioma", "meningioma", "no_tumour", "pituitary")
    planes = ("axial", "coronal", "sagittal")
    train_recs, test_recs, cand_recs = [], [], []
    for i in range(60):
        img = disc_image(size=140 + (i % 5) * 10, radius_frac=0.22 + 0.02 * (i % 7),
                         fg_base=90 + (i % 4) * 25, seed=i)
        rid = f"tr{i:03d}"
        save_png(img, raw / f"{rid}.png")
        train_recs.append(ImageRecord(id=rid, path=f"raw/{rid}.png", split="train",
                                      source="real", tumour_class=classes[i % 4],
                                      plane=planes[i % 3]))
    for i in range(20):
        img = disc_image(size=150, radius_frac=0.24 + 0.02 * (i % 6),
                         fg_base=100 + (i % 3) * 30, seed=500 + i)
        rid = f"te{i:03d}"
        save_png(img, raw / f"{rid}.png")
        test_recs.append(ImageRecord(id=rid, path=f"raw/{rid}.png", split="test",
                                     source="real", tumour_class=classes[i % 4],
                                     plane=planes[i % 3]))
    # one planted duplicate of a test image in train
    (raw / "dup000.png").write_bytes((raw / "te000.png").read_bytes())
    train_recs.append(ImageRecord(id="dup000", path="raw/dup000.png", split="train",
                                  source="real", tumour_class=classes[0], plane=planes[0]))
    for i in range(30):
        img = disc_image(size=128, radius_frac=0.2 + 0.025 * (i % 8),
                         centre=(50 + 3 * i % 40 + 40, 88 - 2 * (i % 20)),
                         fg_base=80 + (i % 5) * 20, seed=900 + i)
        rid = f"cand{i:03d}"
        save_png(img, raw / f"{rid}.png")
        cand_recs.append(ImageRecord(id=rid, path=f"raw/{rid}.png", split="train",
                                     source="synthetic", tumour_class=classes[i % 2],
                                     plane=planes[i % 2]))
    write_manifest(build_manifest(train_recs), base / "train.csv")
    write_manifest(build_manifest(test_recs), base / "test.csv")
    write_manifest(build_manifest(cand_recs), base / "candidates.csv")

    # filter-stage fixtures: a duplicate-free real manifest with aligned
    # features, and a pool hugging each stratum centre with headroom over
    # the 1:2 quota (14 candidates for a max quota of 10)
    rng = np.random.default_rng(77)
    filter_real = sorted((r for r in train_recs if r.id != "dup000"), key=lambda r: r.id)
    write_manifest(build_manifest(filter_real), base / "filter_real.csv")
    centres = {}
    real_rows = []
    for rec in filter_real:
        key = (rec.tumour_class, rec.plane)
        centres.setdefault(key, rng.normal(0, 5, size=16))
        real_rows.append(centres[key] + rng.normal(size=16))
    write_feature_matrix(FeatureMatrix(ids=tuple(r.id for r in filter_real),
                                       data=np.array(real_rows, dtype=np.float32)),
                         base / "real.feat")
    pool_recs, pool_rows = [], []
    for key, centre in sorted(centres.items()):
        for j in range(14):
            rid = f"pool_{key[0]}_{key[1]}_{j:02d}"
            pool_recs.append(ImageRecord(id=rid, path=f"{rid}.png", split="train",
                                         source="synthetic", tumour_class=key[0],
                                         plane=key[1]))
            pool_rows.append(centre + 0.4 * rng.normal(size=16))
    order = np.argsort([r.id for r in pool_recs])
    write_manifest(build_manifest(pool_recs), base / "pool.csv")
    write_feature_matrix(FeatureMatrix(ids=tuple(pool_recs[i].id for i in order),
                                       data=np.array([pool_rows[i] for i in order],
                                                     dtype=np.float32)),
                         base / "pool.feat")

    # generator feature files
    gen_rows = np.array(real_rows[:20], dtype=np.float32) + 0.2
    write_feature_matrix(FeatureMatrix(ids=tuple(f"gen{i:03d}" for i in range(20)),
                                       data=gen_rows), base / "gen.feat")

    # snapshot table, prediction cubes, histories, VLM audit
    (base / "snapshots.csv").write_text(
        "generator,kimg,fid,kid,precision,recall\n"
        "glioma_axial,960,25.36,0.00919,0.5128,0.0863\n"
        "glioma_axial,480,31.0,0.02,0.70,0.20\n"
        "glioma_axial,720,28.0,0.01,0.40,0.05\n")
    cube_rng = np.random.default_rng(11)
    cls = np.array(classes)
    true = cls[cube_rng.integers(0, 4, 40)]
    lines = ["condition,seed,image_id,true_class,pred_class,true_plane,pred_plane"]
    for cond, acc in (("baseline", 0.7), ("aug_1to1", 0.8)):
        preds = np.where(cube_rng.random((3, 40)) < acc, true[None, :],
                         cls[cube_rng.integers(0, 4, (3, 40))])
        for s in range(3):
            for i in range(40):
                lines.append(f"{cond},{s},img{i:03d},{true[i]},{preds[s, i]},,")
    (base / "cubes.csv").write_text("\n".join(lines) + "\n")
    for cond, sel in (("hist_base", 5), ("hist_aug", 2)):
        d = base / cond
        d.mkdir()
        for seed in range(6):
            with open(d / f"seed{seed}.jsonl", "w") as fh:
                for step in range(1, 7):
                    fh.write(json.dumps({"step": step,
                                         "val_loss": 0.1 if step == sel else 1.0,
                                         "val_tumour_acc": 0.9, "real_in_batch": 64,
                                         "batch_size": 128}) + "\n")
    vlm = ["image_id,true_class,pred_class,true_plane,pred_plane,true_source,pred_source"]
    for i in range(40):
        gate_ok = i % 4 != 0
        vlm.append(f"v{i},glioma,{'glioma' if gate_ok else 'pituitary'},axial,axial,"
                   f"real,{'real' if i % 3 else 'synthetic'}")
    (base / "vlm.csv").write_text("\n".join(vlm) + "\n")


def run_pipeline(base, out):
    cfg = base / "fast.toml"
    if not cfg.exists():
        cfg.write_text("permutation_resamples = 200\nbootstrap_resamples = 200\n")
    steps = [
        ["preprocess", "--manifest", str(base / "train.csv"),
         "--images-root", str(base), "--out-dir", str(out / "pre_train")],
        ["preprocess", "--manifest", str(base / "test.csv"),
         "--images-root", str(base), "--out-dir", str(out / "pre_test")],
        ["audit", "--train", str(out / "pre_train" / "manifest.csv"),
         "--test", str(out / "pre_test" / "manifest.csv"),
         "--remove", "--out-dir", str(out / "audit")],
        ["gate", "--candidates", str(base / "candidates.csv"),
         "--refs", str(out / "pre_test" / "manifest.csv"),
         "--out-dir", str(out / "gate")],
        ["quota", "--manifest", str(base / "train.csv"), "--out-dir", str(out / "quota")],
        ["filter", "--real", str(base / "filter_real.csv"),
         "--real-feats", str(base / "real.feat"),
         "--pool", str(base / "pool.csv"), "--pool-feats", str(base / "pool.feat"),
         "--ratios", "1,2", "--out-dir", str(out / "filter")],
        ["select-checkpoint", "--snapshots", str(base / "snapshots.csv"),
         "--out-dir", str(out / "select")],
        ["genmetrics", "--real-feats", str(base / "real.feat"),
         "--gen-feats", str(base / "gen.feat"), "--out-dir", str(out / "genmetrics")],
        ["eval", "--cubes", str(base / "cubes.csv"), "--baseline-condition", "baseline",
         "--classifier", "cnn", "--out-dir", str(out / "eval")],
        ["vlm-stats", "--audit-csv", str(base / "vlm.csv"), "--out-dir", str(out / "vlm")],
        ["efficiency", "--baseline", str(base / "hist_base"),
         "--condition", str(base / "hist_aug"), "--condition-name", "aug",
         "--mode", "real_epoch", "--n-real-rows", "300", "--out-dir", str(out / "eff")],
        ["report", "--out-dir", str(out)],
    ]
    for step in steps:
        rc = main(["--config", str(cfg)] + step)
        assert rc == 0, f"step {step[0]} failed"


def test_pipeline_deterministic_across_runs(tmp_path):
    base = tmp_path / "inputs"
    build_inputs(base)
    digests = []
    for run in ("run_a", "run_b"):
        out = tmp_path / run
        out.mkdir()
        run_pipeline(base, out)
        digests.append(digest_tree(out))
    assert digests[0] == digests[1]
    # spot-check headline artifacts exist and carry the expected outcomes
    audit_report = json.loads((tmp_path / "run_a" / "audit" / "audit_report.json").read_text())
    assert audit_report["removed"] == ["dup000"]
    cleaned = load_manifest(tmp_path / "run_a" / "audit" / "train_clean.csv")
    assert len(cleaned) == 60
    quotas = json.loads((tmp_path / "run_a" / "quota" / "quotas.json").read_text())
    assert quotas["total"] == sum(quotas["per_stratum"].values())
    sel = (tmp_path / "run_a" / "select" / "checkpoint_selection.csv").read_text().splitlines()
    assert any(line.startswith("glioma_axial,960") and line.endswith(",1") for line in sel[1:])
    report = json.loads((tmp_path / "run_a" / "report.json").read_text())
    assert len(report["artifacts"]) > 10
