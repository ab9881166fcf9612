"""Command-line surface tying the pipeline together for batch use.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Diagnostics go to
stderr; results go to stdout or the path given with --out. A flat
``key = value`` config file can back any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import rng as rng_mod
from .corpus import (
    ArgumentInstance,
    Vocabulary,
    build_vocabulary,
    instance_text_pool,
    load_dataset,
    tokenize,
)
from .denoiser import (
    RemoteDenoiser,
    TrainConfig,
    load_model,
    save_model,
    train_denoiser,
    training_pairs,
)
from .engine import DiffusionSchedule, RefineConfig, generate, refine
from .errors import RemaskError
from .masking import MaskConfig
from .metrics import (
    EvalReport,
    ExternalScorer,
    METRIC_KEYS,
    ablation,
    conciseness_proxy,
    coverage_proxy,
    evaluate_instances,
    faithfulness_proxy,
    render_ablation_table,
    rouge_l,
    rouge_n,
)
from .state import SummaryState
from .sufficiency import (
    ClassifierConfig,
    ClassifierModel,
    ClassifierScorer,
    CombinedScorer,
    ConstantScorer,
    CotClient,
    CotScorer,
    HeuristicScorer,
    IdfTable,
    bce_loss,
    build_perturbation_dataset,
    holdout_accuracy,
    split_spans,
    train_classifier,
)


class UsageError(RemaskError):
    """Bad command line or config; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# Config file handling


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _cast_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


class Settings:
    """Merged view of flags over config-file values over defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        config_path = getattr(args, "config", None)
        self.file_values = parse_config_file(config_path) if config_path else {}

    def get(self, key: str, default, cast=None):
        flag = getattr(self.args, key, None)
        if flag is not None:
            return flag
        if key in self.file_values:
            raw = self.file_values[key]
            if cast is bool:
                return _cast_bool(raw)
            try:
                return cast(raw) if cast else raw
            except ValueError:
                raise UsageError(f"config key {key!r}: cannot parse {raw!r}")
        return default


@dataclass
class RunConfig:
    """Everything a generation run depends on; embedded in every output."""

    seed: int = 0
    length: int = 64
    steps: int = 8
    remask_policy: str = "low_confidence_remask"
    fill_policy: str = "sample"
    refine_iterations: int = 0
    inner_steps: int = 4
    tau: float = 0.9
    scorer: str = "heuristic"
    lam: float = 0.1
    r: float = 0.2
    r_decay: float = 1.0
    epsilon_converged: float = 1e-6
    granularity: str = "token"
    alpha_combine: float = 0.5
    model_path: str | None = None
    classifier_path: str | None = None

    def schedule(self) -> DiffusionSchedule:
        return DiffusionSchedule.linear(self.steps, policy=self.remask_policy)

    def mask_config(self) -> MaskConfig:
        return MaskConfig(
            lam=self.lam,
            r=self.r,
            r_decay=self.r_decay,
            epsilon_converged=self.epsilon_converged,
            granularity=self.granularity,
        )

    def refine_config(self) -> RefineConfig:
        return RefineConfig(
            iterations=self.refine_iterations,
            mask_config=self.mask_config(),
            inner_steps=self.inner_steps,
            convergence_tau=self.tau,
            scorer=self.scorer,
        )

    def validate(self) -> None:
        # Constructing the module configs runs all their range checks; any
        # violation is a usage error since no work has started yet.
        try:
            self.schedule()
            self.refine_config()
        except RemaskError as exc:
            raise UsageError(str(exc)) from exc
        if self.length < 1:
            raise UsageError("length must be >= 1")
        if self.fill_policy not in ("argmax", "sample"):
            raise UsageError("fill-policy must be 'argmax' or 'sample'")

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "length": self.length,
            "steps": self.steps,
            "remask_policy": self.remask_policy,
            "fill_policy": self.fill_policy,
            "refine_iterations": self.refine_iterations,
            "inner_steps": self.inner_steps,
            "tau": self.tau,
            "scorer": self.scorer,
            "lambda": self.lam,
            "r": self.r,
            "r_decay": self.r_decay,
            "epsilon_converged": self.epsilon_converged,
            "granularity": self.granularity,
            "alpha_combine": self.alpha_combine,
            "model_path": self.model_path,
            "classifier_path": self.classifier_path,
        }


def _run_config(settings: Settings, *, refine_default: int = 0) -> RunConfig:
    cfg = RunConfig(
        seed=settings.get("seed", 0, int),
        length=settings.get("length", 0, int) or 0,
        steps=settings.get("steps", 8, int),
        remask_policy=settings.get("remask_policy", "low_confidence_remask"),
        fill_policy=settings.get("fill_policy", "sample"),
        refine_iterations=settings.get("refine", refine_default, int),
        inner_steps=settings.get("inner_steps", 4, int),
        tau=settings.get("tau", 0.9, float),
        scorer=settings.get("scorer", "heuristic"),
        lam=settings.get("lam", 0.1, float),
        r=settings.get("r", 0.2, float),
        r_decay=settings.get("r_decay", 1.0, float),
        epsilon_converged=settings.get("epsilon_converged", 1e-6, float),
        granularity=settings.get("granularity", "token"),
        alpha_combine=settings.get("alpha_combine", 0.5, float),
        model_path=settings.get("model", None),
        classifier_path=settings.get("classifier", None),
    )
    return cfg


# ---------------------------------------------------------------------------
# Shared helpers


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def build_scorer(
    name: str,
    *,
    idf: IdfTable | None = None,
    classifier_path: str | None = None,
    alpha: float = 0.5,
    environ=None,
    transport=None,
):
    """Resolve a scorer name; 'a+b' blends any two, 'combined' is classifier+cot."""
    environ = os.environ if environ is None else environ
    if "+" in name:
        left, right = name.split("+", 1)
        return CombinedScorer(
            build_scorer(left, idf=idf, classifier_path=classifier_path,
                         alpha=alpha, environ=environ, transport=transport),
            build_scorer(right, idf=idf, classifier_path=classifier_path,
                         alpha=alpha, environ=environ, transport=transport),
            alpha,
        )
    if name == "heuristic":
        return HeuristicScorer(idf)
    if name == "classifier":
        if not classifier_path:
            raise UsageError("scorer 'classifier' requires --classifier PATH")
        return ClassifierScorer(ClassifierModel.load(classifier_path))
    if name == "cot":
        return CotScorer(CotClient.from_env(environ, transport=transport))
    if name == "combined":
        return build_scorer(
            "classifier+cot", idf=idf, classifier_path=classifier_path,
            alpha=alpha, environ=environ, transport=transport,
        )
    if name == "none":
        return ConstantScorer()
    raise UsageError(f"unknown scorer {name!r}")


def _load_instances(settings: Settings, flag: str = "data") -> list[ArgumentInstance]:
    path = settings.get(flag, None)
    if not path:
        raise UsageError(f"--{flag} is required")
    return load_dataset(path, settings.get("format", "claims_json"))


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_train_denoiser(args: argparse.Namespace) -> int:
    settings = Settings(args)
    instances = _load_instances(settings)
    vocab = build_vocabulary(instance_text_pool(instances), settings.get("min_count", 1, int))
    config = TrainConfig(
        mask_ratio=settings.get("mask_ratio", 0.3, float),
        epochs=settings.get("epochs", 1, int),
        seed=settings.get("seed", 0, int),
        model_kind=settings.get("model_kind", "categorical"),
        canvas_length=settings.get("length", 64, int),
        alpha=settings.get("alpha", 0.1, float),
        copy_bias=settings.get("copy_bias", 2.0, float),
        n_buckets=settings.get("buckets", 4, int),
        gradient_refine=settings.get("gradient_refine", False, bool),
        gradient_step=settings.get("gradient_step", 0.1, float),
    )
    pairs = training_pairs(instances, vocab)
    model, report = train_denoiser(pairs, vocab, config)
    out = settings.get("out", None)
    if not out:
        raise UsageError("--out is required")
    save_model(model, out)
    _info(f"trained {config.model_kind} denoiser on {len(pairs)} instances -> {out}")
    summary = {
        "model": out,
        "kind": config.model_kind,
        "instances": len(pairs),
        "vocabulary_size": len(vocab),
        "final_loss": report.final_loss,
        "loss_curve": [[step, loss] for step, loss in report.loss_curve],
        "config_echo": report.config_echo,
    }
    print(json.dumps(summary, sort_keys=True))
    return 0


def _cmd_train_classifier(args: argparse.Namespace) -> int:
    settings = Settings(args)
    instances = _load_instances(settings)
    seed = settings.get("seed", 0, int)
    # one negative per type roughly balances labels for short references
    k_per_type = settings.get("k_per_type", 1, int)
    spans = build_perturbation_dataset(instances, rng_mod.stream(seed, "perturb"), k_per_type)
    holdout_fraction = settings.get("holdout", 0.2, float)
    train_split, holdout = split_spans(spans, holdout_fraction, rng_mod.stream(seed, "split"))
    config = ClassifierConfig(
        epochs=settings.get("epochs", 200, int),
        lr=settings.get("lr", 0.5, float),
        seed=seed,
        dim=settings.get("dim", 4096, int),
    )
    model = train_classifier(train_split or spans, config)
    out = settings.get("out", None)
    if not out:
        raise UsageError("--out is required")
    model.save(out)
    summary = {
        "model": out,
        "spans": len(spans),
        "train_spans": len(train_split),
        "holdout_spans": len(holdout),
        "train_loss": bce_loss(model, train_split or spans),
        "holdout_accuracy": holdout_accuracy(model, holdout) if holdout else None,
        "config_echo": {"epochs": config.epochs, "lr": config.lr, "seed": seed,
                         "dim": config.dim, "k_per_type": k_per_type},
    }
    _info(f"trained classifier on {len(train_split)} spans -> {out}")
    print(json.dumps(summary, sort_keys=True))
    return 0


def _resolve_model(settings: Settings, cfg: RunConfig):
    endpoint = settings.get("denoiser_endpoint", None)
    if endpoint:
        vocab_path = settings.get("vocab", None)
        if not vocab_path:
            raise UsageError("--denoiser-endpoint requires --vocab PATH")
        vocab = Vocabulary.load(vocab_path)
        length = cfg.length or 64
        return RemoteDenoiser(vocab, length, endpoint,
                              token=os.environ.get("REMASK_LLM_TOKEN")), vocab
    if not cfg.model_path:
        raise UsageError("--model is required (or --denoiser-endpoint)")
    return load_model(cfg.model_path)


def _cmd_generate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cfg = _run_config(settings)
    model, _vocab = _resolve_model(settings, cfg)
    if not cfg.length:
        cfg.length = model.canvas_length
    cfg.validate()
    instances = _load_instances(settings, flag="input")
    idf = IdfTable.build(instances)
    scorer = None
    if cfg.refine_iterations > 0:
        scorer = build_scorer(
            cfg.scorer, idf=idf, classifier_path=cfg.classifier_path, alpha=cfg.alpha_combine
        )
    schedule = cfg.schedule()
    refine_config = cfg.refine_config()
    results = []
    trace_lines: list[str] = []
    for inst in instances:
        gen_rng = rng_mod.stream(cfg.seed, f"fill:{inst.id}")
        state = generate(inst, model, schedule, cfg.length, gen_rng, cfg.fill_policy)
        if cfg.refine_iterations > 0:
            plan_rng = rng_mod.stream(cfg.seed, f"plan:{inst.id}")
            trace = refine(state, inst, model, scorer, refine_config, plan_rng)
            state = trace.final_state
            trace_lines.extend(trace.to_jsonl_lines(instance_id=inst.id))
        summary = state.to_text()
        row = {
            "id": inst.id,
            "summary": summary,
            "coverage": coverage_proxy(summary, inst, idf),
            "faithfulness": faithfulness_proxy(summary, inst, idf),
            "conciseness": conciseness_proxy(summary, inst),
        }
        if inst.reference_summary:
            cand, ref = tokenize(summary), tokenize(inst.reference_summary)
            row["rouge_1"] = rouge_n(cand, ref, 1)
            row["rouge_2"] = rouge_n(cand, ref, 2)
            row["rouge_l"] = rouge_l(cand, ref)
        results.append(row)

    trace_path = settings.get("trace", None)
    if trace_path:
        Path(trace_path).write_text("\n".join(trace_lines) + "\n" if trace_lines else "",
                                    encoding="utf-8")
    report_path = settings.get("report", None)
    if report_path:
        report = {"config_echo": cfg.echo(), "results": results}
        Path(report_path).write_text(json.dumps(report, sort_keys=True, indent=1) + "\n",
                                     encoding="utf-8")
    out_lines = [json.dumps({"id": row["id"], "summary": row["summary"]}, sort_keys=True)
                 for row in results]
    out = settings.get("out", None)
    if out:
        Path(out).write_text("\n".join(out_lines) + "\n", encoding="utf-8")
    for row in results:
        print(row["summary"])
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    settings = Settings(args)
    instances = _load_instances(settings, flag="input")
    instance_id = settings.get("instance_id", None)
    if instance_id:
        matching = [inst for inst in instances if inst.id == instance_id]
        if not matching:
            raise UsageError(f"no instance with id {instance_id!r}")
        instance = matching[0]
    else:
        instance = instances[0]
    summary = settings.get("summary", None)
    summary_file = settings.get("summary_file", None)
    if bool(summary) == bool(summary_file):
        raise UsageError("provide exactly one of --summary or --summary-file")
    if summary_file:
        summary = Path(summary_file).read_text(encoding="utf-8").strip()
    seq = tokenize(summary)
    if len(seq) == 0:
        raise UsageError("summary is empty")
    state = SummaryState.from_reference(seq)
    idf = IdfTable.build(instances)
    scorer = build_scorer(
        settings.get("scorer", "heuristic"),
        idf=idf,
        classifier_path=settings.get("classifier", None),
        alpha=settings.get("alpha_combine", 0.5, float),
    )
    profile = scorer.profile(state, instance)
    payload = {
        "instance": instance.id,
        "config_echo": {
            "scorer": scorer.name,
            "classifier": settings.get("classifier", None),
            "alpha_combine": settings.get("alpha_combine", 0.5, float),
        },
        "scorer": scorer.name,
        **profile.to_json_dict(),
    }
    _emit(json.dumps(payload, sort_keys=True, indent=1) + "\n", settings.get("out", None))
    return 0


def _parse_external(settings: Settings) -> list[ExternalScorer]:
    scorers = []
    for raw, kind in ((settings.get("external_cmd", None), "command"),
                      (settings.get("external_endpoint", None), "endpoint")):
        if not raw:
            continue
        if "=" not in raw:
            raise UsageError(f"--external-{kind[:3]} expects NAME=TARGET, got {raw!r}")
        name, target = raw.split("=", 1)
        if kind == "command":
            scorers.append(ExternalScorer(name, command=target))
        else:
            scorers.append(ExternalScorer(name, endpoint=target))
    return scorers


def _render_eval_table(report: EvalReport, csv: bool) -> str:
    header = ["id", *METRIC_KEYS]
    rows = [header]
    for item in report.per_instance:
        rows.append([item.instance_id] + [f"{getattr(item, key):.3f}" for key in METRIC_KEYS])
    rows.append(["mean"] + [f"{report.means[key]:.3f}" for key in METRIC_KEYS])
    if csv:
        return "\n".join(",".join(row) for row in rows)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows
    )


def _cmd_evaluate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    instances = _load_instances(settings)
    summaries_path = settings.get("summaries", None)
    if not summaries_path:
        raise UsageError("--summaries is required")
    by_id: dict[str, str] = {}
    for lineno, line in enumerate(
        Path(summaries_path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            by_id[row["id"]] = row["summary"]
        except (ValueError, KeyError, TypeError):
            raise UsageError(f"{summaries_path}:{lineno}: expected {{\"id\",\"summary\"}} JSON")
    pairs = []
    for inst in instances:
        if inst.id not in by_id:
            raise RemaskError(f"no summary for instance {inst.id!r} in {summaries_path}")
        pairs.append((inst, by_id[inst.id]))
    idf = IdfTable.build(instances)
    report = evaluate_instances(
        pairs, idf=idf,
        config_echo={"data": settings.get("data", None), "summaries": summaries_path},
        external=_parse_external(settings),
    )
    print(_render_eval_table(report, settings.get("csv", False, bool)))
    out = settings.get("out", None)
    if out:
        Path(out).write_text(json.dumps(report.to_json_dict(), sort_keys=True, indent=1) + "\n",
                             encoding="utf-8")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    cfg = _run_config(settings)
    instances = _load_instances(settings)
    model, _vocab = _resolve_model(settings, cfg)
    if not cfg.length:
        cfg.length = model.canvas_length
    cfg.validate()
    idf = IdfTable.build(instances)
    scorer_names = [s for s in settings.get("scorers", "heuristic").split(",") if s]
    iteration_counts = [int(s) for s in settings.get("iterations", "0,1,2,3").split(",") if s]
    scorers = [
        (name, build_scorer(name, idf=idf, classifier_path=cfg.classifier_path,
                            alpha=cfg.alpha_combine))
        for name in scorer_names
    ]
    cells = ablation(
        instances,
        model,
        scorers,
        iteration_counts,
        schedule=cfg.schedule(),
        length=cfg.length,
        refine_config=cfg.refine_config(),
        seed=cfg.seed,
        idf=idf,
        fill_policy=cfg.fill_policy,
    )
    print(render_ablation_table(cells, csv=settings.get("csv", False, bool)))
    out = settings.get("out", None)
    if out:
        payload = [
            {
                "scorer": cell.scorer_name,
                "iterations": cell.iterations,
                "means": cell.report.means if cell.report else None,
                "error": cell.error,
            }
            for cell in cells
        ]
        Path(out).write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n",
                             encoding="utf-8")
    failures = [cell for cell in cells if cell.error]
    for cell in failures:
        _info(f"cell ({cell.scorer_name}, {cell.iterations}) failed: {cell.error}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> _Parser:
    parser = _Parser(prog="remask", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--config", help="flat key = value config file; flags win")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")

    p = sub.add_parser("train-denoiser", help="fit a denoiser on a dataset with references")
    add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--mask-ratio", dest="mask_ratio", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--model-kind", dest="model_kind", choices=["categorical", "oracle"])
    p.add_argument("--length", type=int)
    p.add_argument("--min-count", dest="min_count", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--copy-bias", dest="copy_bias", type=float)
    p.add_argument("--buckets", type=int)
    p.add_argument("--gradient-refine", dest="gradient_refine", action="store_const", const=True)
    p.add_argument("--gradient-step", dest="gradient_step", type=float)

    p = sub.add_parser("train-classifier", help="build perturbation labels and fit the classifier")
    add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--k-per-type", dest="k_per_type", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--dim", type=int)
    p.add_argument("--holdout", type=float)

    p = sub.add_parser("generate", help="generate summaries, optionally with refinement")
    add_common(p)
    p.add_argument("--model")
    p.add_argument("--denoiser-endpoint", dest="denoiser_endpoint")
    p.add_argument("--vocab")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--refine", type=int)
    p.add_argument("--scorer")
    p.add_argument("--classifier")
    p.add_argument("--trace")
    p.add_argument("--report")
    p.add_argument("--length", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--remask-policy", dest="remask_policy",
                   choices=["low_confidence_remask", "random_remask"])
    p.add_argument("--fill-policy", dest="fill_policy", choices=["argmax", "sample"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--r-decay", dest="r_decay", type=float)
    p.add_argument("--epsilon-converged", dest="epsilon_converged", type=float)
    p.add_argument("--granularity", choices=["token", "sentence"])
    p.add_argument("--inner-steps", dest="inner_steps", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha-combine", dest="alpha_combine", type=float)

    p = sub.add_parser("score", help="sufficiency report for an existing summary")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--instance-id", dest="instance_id")
    p.add_argument("--summary")
    p.add_argument("--summary-file", dest="summary_file")
    p.add_argument("--scorer")
    p.add_argument("--classifier")
    p.add_argument("--alpha-combine", dest="alpha_combine", type=float)

    p = sub.add_parser("evaluate", help="score generated summaries against references")
    add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--summaries", required=True)
    p.add_argument("--csv", action="store_const", const=True)
    p.add_argument("--external-cmd", dest="external_cmd")
    p.add_argument("--external-endpoint", dest="external_endpoint")

    p = sub.add_parser("ablate", help="sweep refinement depth and diagnosis strategy")
    add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=["claims_json", "pairs_csv"])
    p.add_argument("--model")
    p.add_argument("--denoiser-endpoint", dest="denoiser_endpoint")
    p.add_argument("--vocab")
    p.add_argument("--iterations")
    p.add_argument("--scorers")
    p.add_argument("--classifier")
    p.add_argument("--csv", action="store_const", const=True)
    p.add_argument("--length", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--fill-policy", dest="fill_policy", choices=["argmax", "sample"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--r-decay", dest="r_decay", type=float)
    p.add_argument("--inner-steps", dest="inner_steps", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--alpha-combine", dest="alpha_combine", type=float)

    return parser


_HANDLERS = {
    "train-denoiser": _cmd_train_denoiser,
    "train-classifier": _cmd_train_classifier,
    "generate": _cmd_generate,
    "score": _cmd_score,
    "evaluate": _cmd_evaluate,
    "ablate": _cmd_ablate,
}


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except RemaskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
