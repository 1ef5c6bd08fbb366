"""Command-line orchestration of the pipeline.

Subcommands: gen, train, calibrate-depth, depthmap, extract, codebook,
classify, eval. Pipeline commands read a JSON config (the source of truth;
``--set key=value`` overrides scalars only) and write their artifact plus a
provenance record embedding the digest of the exact config used, so a rerun
with the same config reproduces byte-identical outputs. Exit codes: 0 ok,
1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import depth, interest, pgm, recognition, sae, synth, whitening
from .corpus import Corpus, sample_stereo_patches, save_corpus, stack_pairs
from .recognition import BlockSpec
from .tensorio import load_tensor, save_tensor


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config

_REQUIRED = object()


@dataclass
class Field:
    kind: object  # python type, "choice", or nested schema dict
    default: object = _REQUIRED
    nullable: bool = False
    choices: tuple = ()


def _coerce(value, field, path):
    if value is None:
        if field.nullable:
            return None
        raise ConfigError(f"{path}: may not be null")
    if isinstance(field.kind, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"{path}: expected an object")
        return _validate(value, field.kind, path)
    if field.kind == "choice":
        if value not in field.choices:
            raise ConfigError(f"{path}: must be one of {field.choices}, got {value!r}")
        return value
    if field.kind is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if field.kind is int and isinstance(value, bool):
        raise ConfigError(f"{path}: expected int, got bool")
    if field.kind is list:
        if not isinstance(value, list) or not all(
            isinstance(v, (str, int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(f"{path}: expected a list of scalars")
        return value
    if not isinstance(value, field.kind):
        raise ConfigError(f"{path}: expected {field.kind.__name__}, got {type(value).__name__}")
    return value


def _validate(config, schema, path="config"):
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {unknown}")
    out = {}
    for key, field in schema.items():
        if key in config:
            out[key] = _coerce(config[key], field, f"{path}.{key}")
        elif field.default is _REQUIRED:
            raise ConfigError(f"{path}.{key}: required key missing")
        else:
            d = field.default
            out[key] = _validate(dict(d), field.kind, f"{path}.{key}") if isinstance(field.kind, dict) and isinstance(d, dict) else d
    return out


_WHITEN_SCHEMA = {
    "d_keep": Field(int, None, nullable=True),
    "variance_keep": Field(float, None, nullable=True),
    "epsilon": Field(float, 1e-8),
}

_BLOCK_SCHEMA = {
    "super": Field(list, _REQUIRED),
    "super_stride": Field(list, _REQUIRED),
    "sub": Field(list, _REQUIRED),
    "sub_stride": Field(list, _REQUIRED),
}

SCHEMAS = {
    "train": {
        "corpus": Field(str),
        "out": Field(str),
        "mode": Field("choice", choices=("D", "M")),
        "q": Field(int),
        "lambda": Field(float, 0.5),
        "learning_rate": Field(float, 0.01),
        "momentum": Field(float, 0.9),
        "batch_size": Field(int, 100),
        "epochs": Field(int, 10),
        "seed": Field(int, 0),
        "init_scale": Field(float, None, nullable=True),
        "samples": Field(int),
        "patch_w": Field(int, 16),
        "patch_h": Field(int, 16),
        "patch_t": Field(int, 1),
        "require_depth": Field(bool, False),
        "full_depth": Field(bool, False),
        "channel": Field("choice", "left", choices=("left", "right")),
        "whitening": Field(_WHITEN_SCHEMA, {"d_keep": None, "variance_keep": None, "epsilon": 1e-8}),
    },
    "calibrate-depth": {
        "bank": Field(str),
        "corpus": Field(str),
        "out": Field(str),
        "samples": Field(int),
        "bins": Field("choice", "quantile", choices=("quantile", "linear")),
        "n_bins": Field(int, 25),
        "full_depth": Field(bool, False),
        "epochs": Field(int, 300),
        "lr": Field(float, 0.5),
        "seed": Field(int, 0),
    },
    "depthmap": {
        "bank": Field(str),
        "calibrator": Field(str),
        "corpus": Field(str),
        "record": Field(int, 0),
        "stride": Field(int, 4),
        "out": Field(str),
        "interest": Field(
            {
                "delta_factor": Field(float, 1.0),
                "samples": Field(int, 2000),
                "seed": Field(int, 0),
            },
            None,
            nullable=True,
        ),
    },
    "extract": {
        "bank": Field(str),
        "corpus": Field(str),
        "out": Field(str),
        "mode": Field("choice", choices=("D", "M", "MD")),
        "channel": Field("choice", "left", choices=("left", "right")),
        "block": Field(_BLOCK_SCHEMA),
        "reducer": Field(
            {
                "fit": Field(bool, False),
                "d_out": Field(int, None, nullable=True),
                "path": Field(str, None, nullable=True),
            },
            {"fit": False, "d_out": None, "path": None},
        ),
    },
    "codebook": {
        "descriptors": Field(list),
        "k": Field(int),
        "max_iters": Field(int, 100),
        "seed": Field(int, 0),
        "out": Field(str),
    },
    "classify": {
        "codebook": Field(str),
        "train_descriptors": Field(list),
        "test_descriptors": Field(list),
        "interest_delta_factor": Field(float, None, nullable=True),
        "epochs": Field(int, 500),
        "lr": Field(float, 1.0),
        "l2": Field(float, 1e-4),
        "seed": Field(int, 0),
        "out": Field(str),
    },
    "eval": {
        "confidences": Field(list),
        "labels": Field(str),
        "out": Field(str),
    },
}


def _apply_overrides(config, pairs):
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        if isinstance(value, (dict, list)):
            raise ConfigError("--set overrides scalars only")
        node = config
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set {key}: {p} is not an object")
        node[parts[-1]] = value
    return config


def _load_config(args, command):
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {args.config}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _apply_overrides(raw, getattr(args, "set", None))
    return _validate(raw, SCHEMAS[command])


# ------------------------------------------------------------ provenance

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_digest(config) -> str:
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()


def _digest_path(path) -> str:
    path = Path(path)
    h = hashlib.sha256()
    if path.is_dir():
        for p in sorted(path.rglob("*")):
            if p.is_file():
                h.update(p.relative_to(path).as_posix().encode())
                h.update(p.read_bytes())
    else:
        h.update(path.read_bytes())
    return h.hexdigest()


def write_provenance(out_dir, command, config, input_paths) -> None:
    record = {
        "command": command,
        "config": config,
        "config_digest": config_digest(config),
        "inputs": {str(p): _digest_path(p) for p in input_paths if Path(p).exists()},
    }
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / "provenance.json").write_text(
        json.dumps(record, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def _setup_threads(args):
    n = args.threads if getattr(args, "threads", None) else os.environ.get("SSYNC_THREADS")
    if n:
        from . import kernels

        kernels.set_num_threads(int(n))


# ------------------------------------------------------------- commands

def _parse_int_pair(text, what):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"{what} expects 'a,b', got {text!r}")
    return int(parts[0]), int(parts[1])


def cmd_gen(args) -> int:
    out = Path(args.out)
    rng = np.random.default_rng(args.seed)
    seqs = []
    if args.kind == "stereogram":
        disparities = [int(d) for d in args.disparities.split(",")]
        for i in range(args.count):
            d = disparities[i % len(disparities)]
            seqs.append(
                synth.gen_random_dot_stereogram(
                    args.width, args.height, d, args.density,
                    seed=int(rng.integers(2**63)), dot_size=args.dot_size,
                )
            )
        save_corpus(out, seqs, with_depth=args.with_depth)
    elif args.kind == "motion":
        vx, vy = _parse_int_pair(args.velocity, "--velocity")
        for _ in range(args.count):
            seqs.append(
                synth.gen_moving_pattern(
                    args.width, args.height, args.frames, (vx, vy), seed=int(rng.integers(2**63))
                )
            )
        save_corpus(out, seqs, with_depth=False)
    elif args.kind == "activity":
        classes = []
        for spec in args.classes.split(";"):
            disp, vel = spec.split(":")
            classes.append((int(disp), _parse_int_pair(vel, "class velocity")))
        for label, (disp, (vx, vy)) in enumerate(classes):
            for _ in range(args.count):
                seqs.append(
                    synth.gen_activity_clip(
                        args.width, args.height, args.frames, disp, (vx, vy),
                        args.density, seed=int(rng.integers(2**63)), label=label,
                    )
                )
        save_corpus(out, seqs, with_depth=False)
    elif args.kind == "halfflat":
        for _ in range(args.count):
            seqs.append(
                synth.gen_half_flat_pair(args.width, args.height, args.density,
                                         seed=int(rng.integers(2**63)),
                                         dot_size=args.dot_size)
            )
        save_corpus(out, seqs, with_depth=False)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown kind {args.kind}")
    flags = {k: v for k, v in vars(args).items() if k not in ("func", "command", "threads")}
    write_provenance(out, f"gen {args.kind}", flags, [])
    print(f"wrote {len(seqs)} records to {out}")
    return 0


def _fit_train_whitening(x, y, mode, wcfg):
    pool = np.vstack([x, y]) if mode == "D" else x
    return whitening.fit_pca_whitening(
        pool, d_keep=wcfg["d_keep"], variance_keep=wcfg["variance_keep"], epsilon=wcfg["epsilon"]
    )


def cmd_train(config) -> int:
    corp = Corpus(config["corpus"])
    samples = sample_stereo_patches(
        corp,
        config["patch_w"],
        config["patch_h"],
        config["patch_t"],
        config["samples"],
        require_ground_truth=config["require_depth"],
        seed=config["seed"],
        full_ground_truth=config["full_depth"],
    )
    x, y = stack_pairs(samples)
    if config["mode"] == "M" and config["channel"] == "right":
        x = y
    white = _fit_train_whitening(x, y, config["mode"], config["whitening"])
    xw = white.transform(x)
    yw = white.transform(y) if config["mode"] == "D" else None
    tc = sae.TrainConfig(
        q=config["q"],
        lam=config["lambda"],
        learning_rate=config["learning_rate"],
        momentum=config["momentum"],
        batch_size=config["batch_size"],
        epochs=config["epochs"],
        seed=config["seed"],
        init_scale=config["init_scale"],
    )
    result = sae.train(tc, xw, yw, mode=config["mode"])
    out = Path(config["out"])
    digest = config_digest(config)
    sae.save_bank(
        out,
        result.bank,
        extra_meta={
            "patch_w": config["patch_w"],
            "patch_h": config["patch_h"],
            "patch_t": config["patch_t"],
            "raw_dim": int(x.shape[1]),
            "whitening": "whitening",  # prefix of the transform in this bundle
            "config_digest": digest,
            "seed": config["seed"],
        },
    )
    whitening.save_whitening(out, white)
    (out / "trace.json").write_text(
        json.dumps({"objective": result.objective_trace}, indent=1) + "\n", encoding="utf-8"
    )
    write_provenance(out, "train", config, [config["corpus"]])
    print(f"trained mode-{config['mode']} bank q={config['q']} -> {out}")
    print(f"objective: first {result.objective_trace[0]:.4f} last {result.objective_trace[-1]:.4f}"
          if result.objective_trace else "objective: no epochs run")
    return 0


def _load_bank_bundle(path):
    bank, meta = sae.load_bank(path)
    white = whitening.load_whitening(path)
    return bank, meta, white


def cmd_calibrate_depth(config) -> int:
    bank, meta, white = _load_bank_bundle(config["bank"])
    corp = Corpus(config["corpus"])
    samples = sample_stereo_patches(
        corp,
        meta["patch_w"],
        meta["patch_h"],
        meta["patch_t"],
        config["samples"],
        require_ground_truth=True,
        seed=config["seed"],
        full_ground_truth=config["full_depth"],
    )
    x, y = stack_pairs(samples)
    codes = sae.encode(bank, bank.mode, white.transform(x), white.transform(y))
    means = np.array([s.ground_truth[s.ground_truth != 0].mean() for s in samples])
    edges = depth.fit_depth_bins(means, config["n_bins"], method=config["bins"])
    labels = np.array([depth.make_depth_label(s.ground_truth, edges) for s in samples])
    fit = depth.fit_calibrator(
        codes, labels, edges, epochs=config["epochs"], lr=config["lr"], seed=config["seed"]
    )
    out = Path(config["out"])
    depth.save_calibrator(
        out, fit.calibrator,
        extra_meta={"config_digest": config_digest(config), "bins": config["bins"]},
    )
    (out / "loss_trace.json").write_text(
        json.dumps({"loss": fit.loss_trace}, indent=1) + "\n", encoding="utf-8"
    )
    write_provenance(out, "calibrate-depth", config, [config["bank"], config["corpus"]])
    acc = float(np.mean(depth.predict_bins(fit.calibrator, codes) == labels))
    print(f"calibrated {config['n_bins']} bins; training accuracy {acc:.3f}")
    return 0


def cmd_depthmap(config) -> int:
    bank, meta, white = _load_bank_bundle(config["bank"])
    cal = depth.load_calibrator(config["calibrator"])
    corp = Corpus(config["corpus"])
    seq = corp.load(config["record"])
    pw, ph = meta["patch_w"], meta["patch_h"]
    dm = depth.predict_depth_map(bank, cal, seq, white, pw, ph, config["stride"])
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    depth.save_depth_map_pgm(out / "depthmap.pgm", dm)
    depth.save_depth_map_tensor(out / "depthmap.sstf", dm)
    if config["interest"] is not None:
        icfg = config["interest"]
        cal_samples = sample_stereo_patches(
            corp, pw, ph, meta["patch_t"], icfg["samples"], seed=icfg["seed"]
        )
        cx, cy = stack_pairs(cal_samples)
        train_codes = sae.encode(bank, bank.mode, white.transform(cx), white.transform(cy))
        delta = interest.calibrate_delta(train_codes, icfg["delta_factor"])
        mask = depth.interest_mask(bank, seq, white, delta, pw, ph, config["stride"])
        pgm.write_pbm(out / "interest_mask.pbm", mask)
        masked = depth.mask_depth_map(dm, mask)
        depth.save_depth_map_pgm(out / "depthmap_masked.pgm", masked)
    write_provenance(out, "depthmap", config,
                     [config["bank"], config["calibrator"], config["corpus"]])
    print(f"depth map {dm.shape[1]}x{dm.shape[0]} -> {out}")
    return 0


def _block_spec(cfg):
    for key in ("super", "sub"):
        if len(cfg[key]) != 3:
            raise ConfigError(f"block.{key} expects [t, h, w]")
    for key in ("super_stride", "sub_stride"):
        if len(cfg[key]) != 2:
            raise ConfigError(f"block.{key} expects [time, space]")
    return BlockSpec(
        tuple(int(v) for v in cfg["super"]),
        tuple(int(v) for v in cfg["super_stride"]),
        tuple(int(v) for v in cfg["sub"]),
        tuple(int(v) for v in cfg["sub_stride"]),
    )


def cmd_extract(config) -> int:
    bank, meta, white = _load_bank_bundle(config["bank"])
    corp = Corpus(config["corpus"])
    spec = _block_spec(config["block"])
    mode = config["mode"]
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)

    sets = []
    for i in range(len(corp)):
        seq = corp.load(i)
        if mode == "M" and config["channel"] == "right":
            seq = type(seq)(seq.right, seq.right, label=seq.label)
        sets.append(recognition.extract_descriptors(seq, bank, mode, spec, white))
    rcfg = config["reducer"]
    reducer = None
    if rcfg["fit"]:
        allcat = np.vstack([s.descriptors for s in sets])
        d_out = rcfg["d_out"] if rcfg["d_out"] is not None else bank.q
        reducer = whitening.fit_pca_reduction(allcat, d_out)
        whitening.save_whitening(out, reducer, prefix="reducer")
    elif rcfg["path"]:
        reducer = whitening.load_whitening(rcfg["path"], prefix="reducer")
    labels = []
    for i, s in enumerate(sets):
        desc = reducer.transform(s.descriptors) if reducer is not None else s.descriptors
        save_tensor(out / f"desc{i:04d}.sstf", desc)
        save_tensor(out / f"norms{i:04d}.sstf", s.code_norms)
        save_tensor(out / f"positions{i:04d}.sstf", s.positions.astype(np.float64))
        labels.append(s.label if s.label is not None else -1)
    (out / "labels.json").write_text(
        json.dumps({"labels": labels, "count": len(sets)}, indent=1) + "\n", encoding="utf-8"
    )
    write_provenance(out, "extract", config, [config["bank"], config["corpus"]])
    print(f"extracted descriptors for {len(sets)} records -> {out}")
    return 0


def _load_descriptor_dir(path):
    path = Path(path)
    meta = json.loads((path / "labels.json").read_text(encoding="utf-8"))
    sets = []
    for i in range(meta["count"]):
        label = meta["labels"][i]
        sets.append(
            recognition.DescriptorSet(
                positions=load_tensor(path / f"positions{i:04d}.sstf").astype(np.int64),
                descriptors=load_tensor(path / f"desc{i:04d}.sstf").astype(np.float64),
                code_norms=load_tensor(path / f"norms{i:04d}.sstf").astype(np.float64),
                label=None if label < 0 else int(label),
            )
        )
    return sets


def _fused_sets(dirs):
    groups = [_load_descriptor_dir(d) for d in dirs]
    counts = {len(g) for g in groups}
    if len(counts) != 1:
        raise ConfigError("descriptor directories hold different record counts")
    out = groups[0]
    for other in groups[1:]:
        out = [recognition.fuse_concat(a, b) for a, b in zip(out, other)]
    return out


def cmd_codebook(config) -> int:
    sets = []
    for d in config["descriptors"]:
        sets.extend(_load_descriptor_dir(d))
    allpts = np.vstack([s.descriptors for s in sets])
    fit = recognition.build_codebook(allpts, config["k"], config["max_iters"], config["seed"])
    out = Path(config["out"])
    recognition.save_codebook(
        out, fit.codebook,
        extra_meta={"config_digest": config_digest(config), "iterations": fit.n_iters},
    )
    write_provenance(out, "codebook", config, config["descriptors"])
    print(f"codebook k={config['k']} from {len(allpts)} descriptors ({fit.n_iters} iters) -> {out}")
    return 0


def cmd_classify(config) -> int:
    cb = recognition.load_codebook(config["codebook"])
    train_sets = _fused_sets(config["train_descriptors"])
    test_sets = _fused_sets(config["test_descriptors"])
    if any(s.label is None for s in train_sets):
        raise ConfigError("training descriptors carry no class labels")
    delta = None
    if config["interest_delta_factor"] is not None:
        all_norms = np.concatenate([s.code_norms for s in train_sets])
        delta = float(config["interest_delta_factor"] * all_norms.mean())
    train_hist = np.stack(
        [recognition.quantize_histogram(s, cb, delta).frequencies for s in train_sets]
    )
    test_hist = np.stack(
        [recognition.quantize_histogram(s, cb, delta).frequencies for s in test_sets]
    )
    labels = np.array([s.label for s in train_sets])
    clf = recognition.train_classifier(
        train_hist, labels,
        epochs=config["epochs"], lr=config["lr"], l2=config["l2"], seed=config["seed"],
    )
    conf = recognition.predict_confidences(clf, test_hist)
    preds = recognition.predict_labels(clf, test_hist)
    out = Path(config["out"])
    recognition.save_classifier(
        out, clf, extra_meta={"config_digest": config_digest(config), "delta": delta}
    )
    save_tensor(out / "train_histograms.sstf", train_hist)
    save_tensor(out / "confidences.sstf", conf)
    test_labels = [s.label if s.label is not None else -1 for s in test_sets]
    (out / "predictions.json").write_text(
        json.dumps(
            {
                "classes": [int(c) for c in clf.classes],
                "predictions": [int(p) for p in preds],
                "labels": test_labels,
            },
            indent=1,
        )
        + "\n",
        encoding="utf-8",
    )
    write_provenance(
        out, "classify", config,
        [config["codebook"], *config["train_descriptors"], *config["test_descriptors"]],
    )
    print(f"classified {len(test_sets)} records over {len(clf.classes)} classes -> {out}")
    return 0


def cmd_eval(config) -> int:
    conf = None
    for path in config["confidences"]:
        c = load_tensor(path).astype(np.float64)
        conf = c if conf is None else conf + c
    conf /= len(config["confidences"])
    meta = json.loads(Path(config["labels"]).read_text(encoding="utf-8"))
    labels = np.asarray(meta["labels"], dtype=np.int64)
    classes = np.asarray(meta["classes"], dtype=np.int64)
    if np.any(labels < 0):
        raise ConfigError("evaluation labels are incomplete")
    report = recognition.evaluate(conf, labels, classes)
    report["per_class_ap"] = {str(k): v for k, v in report["per_class_ap"].items()}
    report["config_digest"] = config_digest(config)
    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(
        json.dumps(report, sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    write_provenance(out, "eval", config, config["confidences"] + [config["labels"]])
    print(f"mean AP {report['mean_ap']:.4f}  CC rate {report['cc_rate']:.4f} -> {out}")
    return 0


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssync",
        description="synchrony-autoencoder pipelines: generation, training, "
        "depth maps, descriptor extraction, and recognition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic PGM corpus")
    gen.add_argument("kind", choices=("stereogram", "motion", "activity", "halfflat"))
    gen.add_argument("--out", required=True)
    gen.add_argument("--count", type=int, default=10,
                     help="records (per class for activity)")
    gen.add_argument("--width", type=int, default=96)
    gen.add_argument("--height", type=int, default=64)
    gen.add_argument("--density", type=float, default=0.5)
    gen.add_argument("--dot-size", type=int, default=1,
                     help="square dot size in pixels")
    gen.add_argument("--disparities", default="0,1,2,3,4,5,6",
                     help="stereogram disparities cycled over records")
    gen.add_argument("--with-depth", action="store_true",
                     help="also write ground-truth depth channels")
    gen.add_argument("--frames", type=int, default=8)
    gen.add_argument("--velocity", default="1,0", help="vx,vy for motion clips")
    gen.add_argument("--classes", default="2:1,0;0:-1,0",
                     help="activity classes as disparity:vx,vy;...")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--threads", type=int)
    gen.set_defaults(func=cmd_gen)

    for name, runner in (
        ("train", cmd_train),
        ("calibrate-depth", cmd_calibrate_depth),
        ("depthmap", cmd_depthmap),
        ("extract", cmd_extract),
        ("codebook", cmd_codebook),
        ("classify", cmd_classify),
        ("eval", cmd_eval),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a scalar config key (dotted paths ok)")
        p.add_argument("--threads", type=int,
                       help="cap kernel worker threads (or env SSYNC_THREADS)")
        p.set_defaults(func=runner, command=name)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _setup_threads(args)
        if args.command == "gen":
            return args.func(args)
        config = _load_config(args, args.command)
        return args.func(config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # runtime failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
