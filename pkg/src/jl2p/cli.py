"""``jl2p`` command line: synth | train | eval | generate."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import synth
from .config import ConfigError, RunConfig, parse_assignments, resolve
from .evaluate import embedding_probe, evaluate_pairs
from .metrics import SCHEMA_VERSION, trajectory, write_report
from .model import JL2PModel, ModelConfig, layout_for
from .pose import PoseError, Skeleton, invert, read_corpus
from .text import EmptySentenceError, WordEmbeddingTable, embed_sentence, load_embeddings
from .trainer import TrainingError, make_pairs, prepare_split, split_data, train

log = logging.getLogger("jl2p")


class CLIError(RuntimeError):
    pass


def _table(path, dim):
    if path:
        if not Path(path).is_file():
            raise CLIError(f"embedding file not found: {path}")
        table = load_embeddings(path)
        if table.dim != dim:
            raise CLIError(f"embedding file {path} has dimension {table.dim}, "
                           f"model expects {dim}")
        return table
    return WordEmbeddingTable(dim)


def _ensure_dir(path):
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise CLIError(f"cannot create output directory {p}: {e}") from e
    if not os.access(p, os.W_OK):
        raise CLIError(f"output directory {p} is not writable")
    return p


# ---------------------------------------------------------------------------
# commands


def cmd_synth(n_clips, seed, out_path, frames=32):
    if n_clips < len(synth.CLASSES):
        raise CLIError(f"--clips must be at least {len(synth.CLASSES)}, got {n_clips}")
    out = Path(out_path)
    _ensure_dir(out.parent if str(out.parent) else ".")
    synth.build_corpus(n_clips, seed, out, duration=frames)
    return out


def cmd_train(cfg: RunConfig):
    paths = cfg.paths
    if not paths.corpus or not Path(paths.corpus).is_file():
        raise CLIError(f"corpus file not found: {paths.corpus}")
    out_dir = _ensure_dir(paths.out_dir)
    ckpt = Path(paths.checkpoint) if paths.checkpoint else out_dir / "model.ckpt.json"
    _ensure_dir(ckpt.parent)
    table = _table(paths.embeddings, cfg.model.word_dim)

    clips = read_corpus(paths.corpus)
    sk = clips[0].sequence.skeleton
    for c in clips:
        if c.sequence.skeleton.joint_names != sk.joint_names:
            raise CLIError(f"clip {c.id} uses a different skeleton")
    model = JL2PModel(ModelConfig(feature_dim=sk.feature_dim, **asdict(cfg.model)))
    split = prepare_split(clips, model, cfg.train, table)
    model, report = train(model, split, cfg.train)

    layout = {**layout_for(sk, cfg.model.word_dim), "fps": clips[0].sequence.fps}
    extra = {"train_config": asdict(cfg.train), "embeddings": paths.embeddings}
    model.save(ckpt, layout, extra)
    report = {"schema_version": SCHEMA_VERSION,
              "checkpoint": os.path.relpath(ckpt, out_dir),
              "run_config": {"model": asdict(cfg.model), "train": asdict(cfg.train)},
              **report}
    report_path = out_dir / "train_report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return ckpt, report_path


def _load_checkpoint(path):
    if not Path(path).is_file():
        raise CLIError(f"checkpoint not found: {path}")
    model, header = JL2PModel.load(path)
    if "layout" not in header:
        raise CLIError(f"checkpoint {path} has no corpus layout header")
    return model, header


def cmd_eval(checkpoint, corpus, out_dir, embeddings=None, ground_truth=False):
    if not Path(corpus).is_file():
        raise CLIError(f"corpus file not found: {corpus}")
    out = _ensure_dir(out_dir)
    model, header = _load_checkpoint(checkpoint)
    layout = header["layout"]
    clips = read_corpus(corpus)
    corpus_layout = clips[0].sequence.skeleton.layout()
    expected = {"joint_names": layout["joint_names"], "root_index": layout["root_index"]}
    if corpus_layout != expected:
        raise CLIError(f"skeleton mismatch: checkpoint has {expected}, corpus has {corpus_layout}")
    tcfg = header.get("train_config", {})
    table = _table(embeddings or header.get("embeddings"), layout["word_dim"])
    split = split_data(clips, tcfg.get("val_fraction", 0.2), tcfg.get("seed", 0))
    pairs = make_pairs(split.val_clips, table, model.to_model_space)
    report = evaluate_pairs(model, pairs, ground_truth=ground_truth)
    paths = write_report(report, out)
    if not ground_truth and all("label" in p.meta for p in pairs):
        probe = embedding_probe(model, pairs)
        (out / "embedding_probe.json").write_text(
            json.dumps({"schema_version": SCHEMA_VERSION, **probe}, indent=2, sort_keys=True)
            + "\n")
    return report, paths


def cmd_generate(checkpoint, sentence, t_steps, out_path, embeddings=None, trajectory_path=None):
    if t_steps <= 0:
        raise CLIError(f"--steps must be positive, got {t_steps}")
    model, header = _load_checkpoint(checkpoint)
    layout = header["layout"]
    table = _table(embeddings or header.get("embeddings"), layout["word_dim"])
    tokens = embed_sentence(sentence, table)
    sk = Skeleton(tuple(layout["joint_names"]), layout["root_index"])
    fps = layout.get("fps", synth.FPS)
    seq = invert(model.generate(tokens, t_steps, sk, fps))
    out = Path(out_path)
    _ensure_dir(out.parent if str(out.parent) else ".")
    doc = {"schema_version": SCHEMA_VERSION, "sentence": sentence,
           "joint_names": list(sk.joint_names), "fps": fps, "frames": seq.frames.tolist()}
    out.write_text(json.dumps(doc) + "\n")
    traj = trajectory(seq)
    tpath = Path(trajectory_path) if trajectory_path else out.with_suffix(".trajectory.csv")
    with open(tpath, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "x_mm", "z_mm"])
        for i, (x, z) in enumerate(traj.points):
            w.writerow([i, repr(float(x)), repr(float(z))])
    return out, tpath, seq


# ---------------------------------------------------------------------------
# argument parsing


def _train_overrides(args) -> dict:
    cli = parse_assignments(args.set)
    t = cli.setdefault("train", {})
    m = cli.setdefault("model", {})
    p = cli.setdefault("paths", {})
    if args.no_curriculum:
        t["curriculum"] = False
    for flag, key in (("loss", "loss"), ("embedding", "embedding_mode"), ("seed", "seed"),
                      ("max_T", "max_T"), ("batch_size", "batch_size"), ("lr", "lr"),
                      ("patience", "patience"), ("epochs_per_stage", "max_epochs_per_stage")):
        val = getattr(args, flag)
        if val is not None:
            t[key] = val
    if args.seed is not None:
        m["seed"] = args.seed
    if args.latent_dim is not None:
        m["latent_dim"] = args.latent_dim
    if args.hidden is not None:
        m["sentence_hidden"] = m["pose_hidden"] = m["decoder_hidden"] = args.hidden
    for flag in ("corpus", "embeddings", "checkpoint", "out_dir"):
        val = getattr(args, flag)
        if val is not None:
            p[flag] = val
    return {k: v for k, v in cli.items() if v}


def build_parser():
    ap = argparse.ArgumentParser(prog="jl2p", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic motion-language corpus")
    s.add_argument("--clips", type=int, default=200)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--frames", type=int, default=32)
    s.add_argument("--out", required=True)

    t = sub.add_parser("train", help="train a model (flags select the ablations)")
    t.add_argument("--config", help="YAML or JSON config file")
    t.add_argument("--corpus")
    t.add_argument("--embeddings")
    t.add_argument("--checkpoint")
    t.add_argument("--out-dir", dest="out_dir")
    t.add_argument("--no-curriculum", action="store_true")
    t.add_argument("--loss", choices=["smooth_l1", "l2"])
    t.add_argument("--embedding", choices=["joint", "sequential"])
    t.add_argument("--seed", type=int)
    t.add_argument("--max-T", dest="max_T", type=int)
    t.add_argument("--batch-size", dest="batch_size", type=int)
    t.add_argument("--lr", type=float)
    t.add_argument("--patience", type=int)
    t.add_argument("--epochs-per-stage", dest="epochs_per_stage", type=int)
    t.add_argument("--latent-dim", dest="latent_dim", type=int)
    t.add_argument("--hidden", type=int, help="width of all three recurrent networks")
    t.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE")

    e = sub.add_parser("eval", help="evaluate a checkpoint on the held-out split")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--corpus", required=True)
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--embeddings")
    e.add_argument("--ground-truth", action="store_true",
                   help="score ground truth against itself (sanity check)")

    g = sub.add_parser("generate", help="generate an animation from a sentence")
    g.add_argument("--checkpoint", required=True)
    g.add_argument("--sentence", required=True)
    g.add_argument("--steps", type=int, default=100)
    g.add_argument("--out", required=True)
    g.add_argument("--trajectory")
    g.add_argument("--embeddings")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            out = cmd_synth(args.clips, args.seed, args.out, args.frames)
            print(out)
        elif args.command == "train":
            cfg = resolve(args.config, _train_overrides(args))
            ckpt, report = cmd_train(cfg)
            print(f"checkpoint: {ckpt}\nreport: {report}")
        elif args.command == "eval":
            report, paths = cmd_eval(args.checkpoint, args.corpus, args.out,
                                     args.embeddings, args.ground_truth)
            print(f"mean APE {report.mean_ape:.2f} mm "
                  f"(w/o root {report.mean_ape_without_root:.2f}); report: {paths['json']}")
        elif args.command == "generate":
            out, tpath, _ = cmd_generate(args.checkpoint, args.sentence, args.steps, args.out,
                                         args.embeddings, args.trajectory)
            print(f"{out}\n{tpath}")
    except (CLIError, ConfigError, PoseError, EmptySentenceError, TrainingError) as e:
        print(f"jl2p {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
