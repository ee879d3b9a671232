"""Command-line entry point: ``sahs synth | extract | evaluate``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .abcart import AbCartConfig
from .config import ConfigError, Settings, load_config, to_bool, to_list
from .errors import SahsError
from .eval.experiment import CLASSIFIERS, TASKS, ExperimentConfig, run_experiment
from .eval.report import build_report, config_hash, dumps, render_tables
from .features import write_feature_csv
from .mlp import DEFAULT_HIDDEN, MlpConfig
from .pipeline import extract_cohort, load_subjects
from .svm import SvmConfig
from .synth import CohortSpec, generate_cohort

log = logging.getLogger("sahs")


class CommandError(Exception):
    pass


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in to_list(text))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sahs", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, help="flat key = value settings file")
        p.add_argument("--seed", type=int)
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                       help="log progress to stderr")

    p = sub.add_parser("synth", help="generate a synthetic EDF + XML cohort")
    common(p)
    p.add_argument("--out", type=Path, help="output cohort directory")
    p.add_argument("--four-class-balance", action="store_const", const=True, default=None,
                   help="70/70/70/60 subjects instead of 185/190/85/60")
    p.add_argument("--counts", type=_ints, help="No,Mild,Moderate,Severe subject counts")
    p.add_argument("--hours", type=float)
    p.add_argument("--channel", help="airflow channel label to write")

    p = sub.add_parser("extract", help="compute the 17 airflow features per subject")
    common(p)
    p.add_argument("--cohort", type=Path, help="directory with manifest.csv and EDF/XML pairs")
    p.add_argument("--out", type=Path, help="features CSV to write")
    p.add_argument("--channel", help="airflow channel label (exact match)")
    p.add_argument("--ignore-case", action="store_const", const=True, default=None,
                   help="match the channel label case-insensitively")
    p.add_argument("--cutoff-hz", type=float)
    p.add_argument("--filter-order", type=int)
    p.add_argument("--strict", action="store_const", const=True, default=None,
                   help="exit non-zero if any subject fails")

    p = sub.add_parser("evaluate", help="10-fold comparison of DNN, SVM and AB-CART")
    common(p)
    p.add_argument("--features", type=Path, help="features CSV from 'extract'")
    p.add_argument("--out", type=Path, help="output directory for report.json and tables.txt")
    p.add_argument("--task", action="append", choices=TASKS, help="repeatable; default: all tasks")
    p.add_argument("--classifier", choices=(*CLASSIFIERS, "all"))
    p.add_argument("--folds", type=int)
    p.add_argument("--mlp-epochs", type=int)
    p.add_argument("--mlp-batch-size", type=int)
    p.add_argument("--mlp-learning-rate", type=float)
    p.add_argument("--mlp-hidden", type=_ints, help="comma-separated hidden layer sizes")
    p.add_argument("--svm-c", type=float)
    p.add_argument("--svm-epochs", type=int)
    p.add_argument("--ab-rounds", type=int)
    p.add_argument("--ab-depth", type=int)
    p.add_argument("--fourclass-counts", type=_ints, help="No,Mild,Moderate,Severe subsample sizes")
    return parser


def _settings(args) -> Settings:
    file_values = load_config(args.config) if getattr(args, "config", None) else {}
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "command", "verbose")}
    return Settings(flags, file_values)


def _require(value, name: str):
    if value is None:
        raise CommandError(f"missing required setting {name!r} (flag or config file)")
    return value


def cmd_synth(s: Settings) -> int:
    out = Path(_require(s.get("out", convert=Path), "out"))
    counts = s.get("counts", convert=_ints)
    if counts is None:
        balanced = s.get("four_class_balance", False, to_bool)
        counts = (70, 70, 70, 60) if balanced else (185, 190, 85, 60)
    spec = CohortSpec(
        counts=tuple(counts),
        hours=s.get("hours", 8.0, float),
        seed=s.get("seed", 0, int),
        channel_label=s.get("channel", "Airflow"),
        event_duration_s=(s.get("event_min_s", 10.0, float), s.get("event_max_s", 60.0, float)),
        apnea_fraction=s.get("apnea_fraction", 0.4, float),
    )
    manifest = generate_cohort(spec, out)
    meta = {"counts": list(spec.counts), "hours": spec.hours, "seed": spec.seed,
            "channel": spec.channel_label, "event_duration_s": list(spec.event_duration_s),
            "apnea_fraction": spec.apnea_fraction}
    (out / "cohort.json").write_text(json.dumps({**meta, "config_hash": config_hash(meta)}, indent=2) + "\n")
    print(f"wrote {sum(spec.counts)} subjects to {out} ({manifest.name})")
    return 0


def cmd_extract(s: Settings) -> int:
    cohort = Path(_require(s.get("cohort", convert=Path), "cohort"))
    out = Path(_require(s.get("out", convert=Path), "out"))
    channel = _require(s.get("channel"), "channel")
    cutoff = s.get("cutoff_hz", 3.0, float)
    order = s.get("filter_order", 4, int)
    strict = s.get("strict", False, to_bool)
    if not (cohort / "manifest.csv").is_file():
        raise CommandError(f"{cohort} has no manifest.csv")

    result = extract_cohort(cohort, channel, cutoff_hz=cutoff, order=order,
                            case_insensitive=s.get("ignore_case", False, to_bool))
    out.parent.mkdir(parents=True, exist_ok=True)
    write_feature_csv(out, result.rows)
    meta = {"channel": channel, "cutoff_hz": cutoff, "filter_order": order}
    Path(f"{out}.meta.json").write_text(
        json.dumps({**meta, "config_hash": config_hash(meta), "rows": len(result.rows),
                    "failures": len(result.failures)}, indent=2) + "\n")
    errors_path = Path(f"{out}.errors.csv")
    if result.failures:
        with open(errors_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["subject_id", "error"])
            writer.writerows(result.failures)
        print(f"{len(result.failures)} subject(s) failed; see {errors_path}", file=sys.stderr)
    elif errors_path.exists():
        errors_path.unlink()
    print(f"wrote {len(result.rows)} feature rows to {out}")
    if result.failures and strict:
        return 1
    return 0


def _experiment_config(s: Settings) -> ExperimentConfig:
    return ExperimentConfig(
        k=s.get("folds", 10, int),
        mlp=MlpConfig(
            hidden_sizes=s.get("mlp_hidden", DEFAULT_HIDDEN, _ints),
            learning_rate=s.get("mlp_learning_rate", 1e-3, float),
            batch_size=s.get("mlp_batch_size", 32, int),
            max_epochs=s.get("mlp_epochs", 200, int),
        ),
        svm=SvmConfig(C=s.get("svm_c", 1.0, float), epochs=s.get("svm_epochs", 100, int)),
        abcart=AbCartConfig(num_rounds=s.get("ab_rounds", 50, int), max_depth=s.get("ab_depth", 3, int)),
        fourclass_counts=tuple(s.get("fourclass_counts", (70, 70, 70, 60), _ints)),
    )


def cmd_evaluate(s: Settings) -> int:
    features = Path(_require(s.get("features", convert=Path), "features"))
    out = Path(_require(s.get("out", convert=Path), "out"))
    seed = _require(s.get("seed", convert=int), "seed")
    tasks = s.get("task", list(TASKS), to_list)
    bad = [t for t in tasks if t not in TASKS]
    if bad:
        raise CommandError(f"unknown task(s) {bad}; choose from {TASKS}")
    choice = s.get("classifier", "all")
    classifiers = list(CLASSIFIERS) if choice == "all" else [choice]
    if any(c not in CLASSIFIERS for c in classifiers):
        raise CommandError(f"unknown classifier {choice!r}")
    config = _experiment_config(s)

    subjects = load_subjects(features)
    blocks = []
    for task in [t for t in TASKS if t in tasks]:
        log.info("running %s on %d subjects", task, len(subjects))
        blocks.append(run_experiment(subjects, task, classifiers, seed, config))

    settings = {
        "features_sha256": hashlib.sha256(features.read_bytes()).hexdigest(),
        "tasks": [b["task"] for b in blocks],
        "classifiers": classifiers,
        "k": config.k,
        "mlp": {"hidden_sizes": list(config.mlp.hidden_sizes), "learning_rate": config.mlp.learning_rate,
                "rms_decay": config.mlp.rms_decay, "epsilon": config.mlp.epsilon,
                "batch_size": config.mlp.batch_size, "max_epochs": config.mlp.max_epochs},
        "svm": {"C": config.svm.C, "epochs": config.svm.epochs, "balanced": config.svm.balanced},
        "abcart": {"num_rounds": config.abcart.num_rounds, "max_depth": config.abcart.max_depth},
        "fourclass_counts": list(config.fourclass_counts),
    }
    report = build_report(blocks, seed, settings)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps(report))
    tables = render_tables(report)
    (out / "tables.txt").write_text(tables)
    print(tables, end="")
    return 0


COMMANDS = {"synth": cmd_synth, "extract": cmd_extract, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        settings = _settings(args)
        code = COMMANDS[args.command](settings)
        for key in settings.unknown_file_keys():
            log.warning("config key %r was not used by '%s'", key, args.command)
        return code
    except (CommandError, ConfigError, SahsError, OSError, ValueError) as exc:
        print(f"sahs {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
