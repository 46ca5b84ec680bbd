"""Command-line interface.

Subcommands: gen, train, eval, gradcheck, ablate, report. Exit codes:
0 success, 1 validation/configuration error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ConfigError, DataFormatError, DimensionError, NumericError
from .config import (echo_config, gamma_offsets, load_config, model_config_for)
from .data import SyntheticSpec, generate_synthetic, load_features, save_dataset
from .ablation import ablation_csv, run_ablation
from .gradcheck import grad_check
from .losses import LossConfig, total_loss
from .metrics import evaluate
from .model import HrtModel, ModelConfig
from .optim import OptimizerConfig
from .tensor import Tensor, no_grad
from .train import load_checkpoint, save_checkpoint, train, write_history

# tiny verification setup: small enough that a full finite-difference sweep of
# every parameter finishes in seconds
TINY_MODEL = dict(r_patches=4, d_feat=16, num_attributes=6, num_classes=7,
                  tau=8, d_cap=8, n_primary=8, k_em=2, k_td=2,
                  pose_mode="vector", compaction="pca")


def _synthetic_spec(config: dict) -> tuple[SyntheticSpec, int]:
    params = dict(config["synthetic"])
    seed = params.pop("seed")
    return SyntheticSpec(**params), seed


def cmd_gen(args) -> int:
    config = load_config(args.config)
    spec, seed = _synthetic_spec(config)
    if args.seed is not None:
        seed = args.seed
    dataset = generate_synthetic(spec, seed)
    save_dataset(dataset, args.out)
    echo_config(config, args.out)
    print(f"wrote {dataset.features.shape[0]} samples to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = load_config(args.config)
    dataset = load_features(args.data)
    seed = config["train"]["seed"] if args.seed is None else args.seed
    model = HrtModel.build(model_config_for(config, dataset),
                           dataset.semantics.attr_vectors,
                           dataset.semantics.class_attr, seed=seed)
    gamma = gamma_offsets(config, model.config.num_classes,
                          dataset.seen_classes, dataset.unseen_classes)
    loss_config = LossConfig(lambda1=config["loss"]["lambda1"],
                             lambda2=config["loss"]["lambda2"],
                             gamma_per_class=gamma)
    history = train(dataset, model, loss_config,
                    OptimizerConfig(**config["optimizer"]),
                    epochs=config["train"]["epochs"], seed=seed,
                    batch_size=config["train"]["batch_size"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(model, out / "model.ckpt", experiment_config=config)
    write_history(history, out / "history.csv")
    echo_config(config, out)
    final = history[-1].total if history else float("nan")
    print(f"trained {len(history)} epochs, final loss {final:.4f} -> {out}")
    return 0


def cmd_eval(args) -> int:
    config = load_config(args.config)
    dataset = load_features(args.data)
    model = load_checkpoint(args.checkpoint)
    gamma = gamma_offsets(config, model.config.num_classes,
                          dataset.seen_classes, dataset.unseen_classes)
    metrics = evaluate(model, dataset, mode=args.mode, gamma=gamma)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(
        json.dumps({"mode": args.mode, **metrics.to_dict()},
                   sort_keys=True, indent=2) + "\n", encoding="utf-8")
    echo_config(config, out)
    print(json.dumps({"mode": args.mode, **metrics.to_dict()}, sort_keys=True))
    return 0


def cmd_gradcheck(args) -> int:
    config = load_config(args.config)
    spec = SyntheticSpec(c_seen=5, c_unseen=2, num_attributes=6, r_patches=4,
                         d_feat=16, tau=8, samples_per_class=2, noise_std=0.1,
                         signal_patches_per_attribute=1)
    dataset = generate_synthetic(spec, seed=args.seed)
    model = HrtModel.build(ModelConfig(**TINY_MODEL),
                           dataset.semantics.attr_vectors,
                           dataset.semantics.class_attr, seed=args.seed)
    gamma = gamma_offsets(config, model.config.num_classes,
                          dataset.seen_classes, dataset.unseen_classes)
    loss_config = LossConfig(lambda1=config["loss"]["lambda1"],
                             lambda2=config["loss"]["lambda2"],
                             gamma_per_class=gamma)
    feats, labels = dataset.split_samples("train")
    x, label = feats[0], int(labels[0])
    report = grad_check(lambda: total_loss(model, x, label, loss_config)[0],
                        model.params, h=args.h, tol=args.tol)
    print(report.summary())
    return 0 if report.passed else 2


def cmd_ablate(args) -> int:
    config = load_config(args.config)
    if args.data:
        dataset = load_features(args.data)
    else:
        spec, seed = _synthetic_spec(config)
        dataset = generate_synthetic(spec, seed)
    rows = run_ablation(dataset, config, axis=args.axis, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(ablation_csv(rows), encoding="utf-8")
    echo_config(config, out.parent)
    print(f"wrote {len(rows)} ablation rows to {out}")
    return 0


def cmd_report(args) -> int:
    dataset = load_features(args.data)
    model = load_checkpoint(args.checkpoint)
    a = model.config.num_attributes
    lines = ["sample_index,patch_index," + ",".join(f"a{i}" for i in range(a))]
    with no_grad():
        for i in range(dataset.features.shape[0]):
            result = model.forward(Tensor(dataset.features[i]))
            phi = result.aligned.agreement.data
            for r in range(phi.shape[0]):
                vals = ",".join(repr(float(v)) for v in phi[r])
                lines.append(f"{i},{r},{vals}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote agreement maps for {dataset.features.shape[0]} samples to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hrt",
                                     description="capsule-routing zero-shot learner")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset directory")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a model on a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--mode", choices=["zsl", "gzsl"], default="gzsl")
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gradcheck",
                       help="finite-difference check of the full loss gradient")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("ablate", help="sweep a routing iteration count")
    p.add_argument("--axis", choices=["k_td", "k_em"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--data", default=None,
                   help="dataset directory; defaults to the configured synthetic task")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="dump per-sample agreement maps as CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError, DimensionError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
