"""Single entry point wiring the expansion pipeline end to end.

Every subcommand resolves its options from defaults, an optional flat
key=value config file, and command-line flags (flags win), then records
the fully resolved configuration next to whatever it writes: directory
outputs get a ``run_config.json``, file outputs get a ``.meta.json``
sidecar, and report files additionally embed the config inline. All
randomness flows from explicit seeds, so reruns are byte-identical.

Exit codes: 0 success, 2 config error, 3 input error, 4 internal error.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import (
    CatalogSplit,
    DEFAULT_MIN_ATC,
    analyze,
    load_engagement,
    load_products,
    product_token_set,
    split_by_product,
)
from .cutoff import ScoredRecord, budget_match_cutoff, candidate_cutoffs, tune_cutoff
from .errors import ConfigError, InputError, ToolkitError
from .filters import ExternalScorer, JaccardScorer, NovelPair, PipelineConfig, run_pipeline
from .metrics import BootstrapConfig, evaluate_records, make_eval_record
from .predictor import (
    CooccurrencePredictor,
    apply_cutoff,
    load_external_predictions,
    load_model,
    save_model,
    train_cooccurrence,
    write_predictions,
)
from .records import dump_json, iter_jsonl, load_json, write_jsonl, write_meta
from .retrieval import (
    DEFAULT_B,
    DEFAULT_K1,
    INDEX_FIELDS,
    build_index,
    eval_recall,
    load_index,
    save_index,
    search,
)
from .synthetic import SyntheticConfig, generate, write_corpus
from .targets import (
    TargetConfig,
    build_target_tokens,
    emit_training_instances,
    load_training_instances,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Opt:
    name: str
    flag: str
    kind: str = "str"          # str | int | float | path | choice
    default: object = None
    required: bool = False
    choices: tuple = ()
    help: str = ""


_COMMON = (
    Opt("config", "--config", "path", help="flat key=value config file; flags override it"),
    Opt("threads", "--threads", "int", default=1, help="global cap on internal parallelism"),
)

SPECS = {
    "ingest": (
        Opt("products", "--products", "path", required=True, help="product JSONL file"),
        Opt("engagement", "--engagement", "path", required=True, help="engagement JSONL file"),
        Opt("min_atc", "--min-atc", "int", default=DEFAULT_MIN_ATC, help="drop pairs below this ATC count"),
        Opt("seed", "--seed", "int", default=0, help="seed for the product split"),
        Opt("ratios", "--ratios", "str", default="8,1,1", help="train,validation,test ratio"),
        Opt("unknown", "--unknown", "choice", default="skip", choices=("skip", "error"),
            help="behavior for pairs referencing unknown products"),
        Opt("out", "--out", "path", required=True, help="output directory"),
    ),
    "filter": (
        Opt("in_dir", "--in", "path", required=True, help="ingest output directory"),
        Opt("scorer", "--scorer", "choice", default="jaccard", choices=("jaccard", "external")),
        Opt("scores", "--scores", "path", help="precomputed relevance scores (external scorer)"),
        Opt("rf_threshold", "--rf-threshold", "float", default=0.0,
            help="relevance retention threshold in [0, 1]"),
        Opt("fmf", "--fmf", "choice", default="on", choices=("on", "off"),
            help="toggle the full-match filter stage"),
        Opt("out", "--out", "path", required=True, help="output directory"),
    ),
    "build-targets": (
        Opt("in_dir", "--in", "path", required=True, help="filter output directory"),
        Opt("alpha", "--alpha", "float", default=0.5, help="frequency smoothing exponent"),
        Opt("split", "--split", "choice", default="train",
            choices=("train", "validation", "test", "all")),
        Opt("out", "--out", "path", required=True, help="training instances JSONL path"),
    ),
    "train": (
        Opt("products", "--products", "path", required=True),
        Opt("instances", "--instances", "path", required=True, help="training instances JSONL"),
        Opt("out", "--out", "path", required=True, help="model JSON path"),
    ),
    "predict": (
        Opt("model", "--model", "str", required=True,
            help="cooccurrence:PATH or external:PATH"),
        Opt("products", "--products", "path", required=True),
        Opt("top", "--top", "int", default=10, help="max predictions per product"),
        Opt("split", "--split", "choice", choices=("train", "validation", "test"),
            help="restrict to one split subset (needs --split-file)"),
        Opt("split_file", "--split-file", "path", help="split.json from ingest"),
        Opt("out", "--out", "path", required=True, help="predictions JSONL path"),
    ),
    "evaluate": (
        Opt("predictions", "--predictions", "path", required=True),
        Opt("references", "--references", "path", required=True,
            help="held-out relevant queries, engagement JSONL format"),
        Opt("products", "--products", "path", required=True),
        Opt("cutoff", "--cutoff", "float", default=0.0, help="confidence cutoff (strict >)"),
        Opt("top", "--top", "int", default=10),
        Opt("split", "--split", "choice", choices=("train", "validation", "test")),
        Opt("split_file", "--split-file", "path"),
        Opt("bootstrap", "--bootstrap", "int", default=0,
            help="bootstrap resamples for CIs (0 disables)"),
        Opt("level", "--level", "float", default=0.95, help="CI level"),
        Opt("seed", "--seed", "int", help="bootstrap seed (required with --bootstrap)"),
        Opt("report", "--report", "path", required=True),
    ),
    "tune-cutoff": (
        Opt("predictions", "--predictions", "path", required=True),
        Opt("references", "--references", "path", required=True),
        Opt("products", "--products", "path", required=True),
        Opt("grid", "--grid", "str", default="observed", help="observed or step:<width>"),
        Opt("top", "--top", "int", default=10),
        Opt("split", "--split", "choice", choices=("train", "validation", "test")),
        Opt("split_file", "--split-file", "path"),
        Opt("budget_target", "--budget-target", "float",
            help="also find the cutoff matching this mean novel-token budget"),
        Opt("report", "--report", "path", required=True),
    ),
    "index": (
        Opt("products", "--products", "path", required=True),
        Opt("expansions", "--expansions", "path", help="prediction JSONL used as the expansion field"),
        Opt("cutoff", "--cutoff", "float", default=0.0, help="confidence cutoff on expansion tokens"),
        Opt("top", "--top", "int", default=10, help="max expansion tokens per product"),
        Opt("field_weights", "--field-weights", "str",
            help="e.g. title:2.0,expansion:1.5 (unlisted fields keep defaults)"),
        Opt("k1", "--k1", "float", default=DEFAULT_K1),
        Opt("b", "--b", "float", default=DEFAULT_B),
        Opt("out", "--out", "path", required=True, help="index JSON path"),
    ),
    "search": (
        Opt("index", "--index", "path", required=True),
        Opt("query", "--query", "str", required=True),
        Opt("k", "--k", "int", default=10),
        Opt("out", "--out", "path", help="optional JSON output path"),
    ),
    "eval-retrieval": (
        Opt("index", "--index", "path", required=True),
        Opt("pairs", "--pairs", "path", required=True, help="engagement JSONL test pairs"),
        Opt("k", "--k", "int", default=10),
        Opt("report", "--report", "path", required=True),
    ),
    "report": (
        Opt("in_dir", "--in", "path", required=True,
            help="directory scanned recursively for stage outputs"),
        Opt("out", "--out", "path", required=True, help="merged report JSON path"),
    ),
    "gen-synthetic": (
        Opt("seed", "--seed", "int", default=0),
        Opt("products", "--products", "int", default=1000),
        Opt("heldout", "--heldout", "int", default=200),
        Opt("out", "--out", "path", required=True, help="output directory"),
    ),
}


@dataclass
class RunConfig:
    subcommand: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        return self.values.get(key, default)

    def as_dict(self) -> dict:
        return {"subcommand": self.subcommand, **self.values}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docexpand",
        description="Document-expansion toolkit: novel-token training data, "
                    "prediction scoring, cutoff tuning, and retrieval impact.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, spec in SPECS.items():
        sub = subparsers.add_parser(name)
        for opt in spec + _COMMON:
            kwargs = {"dest": opt.name, "default": None, "help": opt.help}
            if opt.kind == "choice":
                kwargs["choices"] = opt.choices
            sub.add_argument(opt.flag, **kwargs)
    return parser


def _convert(opt: Opt, raw):
    if raw is None:
        return None
    try:
        if opt.kind == "int":
            return int(raw)
        if opt.kind == "float":
            return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"option {opt.flag} expects a {opt.kind}, got {raw!r}") from None
    if opt.kind == "choice" and raw not in opt.choices:
        raise ConfigError(f"option {opt.flag} must be one of {opt.choices}, got {raw!r}")
    return str(raw)


def _parse_config_file(path: str) -> dict:
    source = Path(path)
    if not source.exists():
        raise ConfigError(f"config file not found: {source}")
    values = {}
    for lineno, line in enumerate(source.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    spec = SPECS[args.subcommand] + _COMMON
    file_values = _parse_config_file(args.config) if args.config else {}
    values = {}
    for opt in spec:
        raw = getattr(args, opt.name)
        if raw is None:
            raw = file_values.get(opt.name)
        value = _convert(opt, raw)
        if value is None:
            value = opt.default
        if value is None and opt.required:
            raise ConfigError(f"missing required option {opt.flag} for {args.subcommand}")
        values[opt.name] = value
    if values.get("threads") is not None and values["threads"] < 1:
        raise ConfigError("--threads must be >= 1")
    return RunConfig(subcommand=args.subcommand, values=values)


def _parse_ratios(text: str) -> tuple:
    parts = text.split(",")
    try:
        ratios = tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--ratios expects three integers, got {text!r}") from None
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ConfigError("--ratios expects three positive integers")
    return ratios


def _split_subset(cfg: RunConfig):
    split_name, split_file = cfg.get("split"), cfg.get("split_file")
    if split_name is None and split_file is None:
        return None
    if split_name is None or split_file is None:
        raise ConfigError("--split and --split-file must be given together")
    return CatalogSplit.from_record(load_json(split_file)).subset(split_name)


def _parse_field_weights(text: str) -> dict:
    weights = {}
    for part in text.split(","):
        name, _, value = part.partition(":")
        name = name.strip()
        if name not in INDEX_FIELDS:
            raise ConfigError(f"unknown index field {name!r} in --field-weights")
        try:
            weights[name] = float(value)
        except ValueError:
            raise ConfigError(f"bad weight for field {name!r}: {value!r}") from None
    return weights


def _load_predictor(cfg: RunConfig):
    spec = cfg["model"]
    kind, _, path = spec.partition(":")
    if kind == "cooccurrence" and path:
        return CooccurrencePredictor(load_model(path))
    if kind == "external" and path:
        return load_external_predictions(path)
    raise ConfigError(f"--model expects cooccurrence:PATH or external:PATH, got {spec!r}")


def _reference_tokens(cfg: RunConfig, products):
    """Group analyzed reference-query tokens by product, honoring --split."""
    known = {p.id for p in products}
    subset = _split_subset(cfg)
    refs = load_engagement(cfg["references"], min_atc=0, known_ids=known,
                           unknown_product="error")
    grouped = {}
    for pair in refs.pairs:
        if subset is not None and pair.product_id not in subset:
            continue
        grouped.setdefault(pair.product_id, []).extend(analyze(pair.query))
    if not grouped:
        raise InputError("no reference queries left after filtering")
    return grouped


# ---------------------------------------------------------------------------
# rendering


def render_table(headers, rows) -> str:
    rows = [[str(cell) for cell in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def line(cells):
        return "  ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()
    out = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out) + "\n"


def _f(value, digits=4):
    return f"{value:.{digits}f}"


def render_metrics_row(label, m: dict) -> list:
    return [
        label, _f(m["rouge_precision"]), _f(m["rouge_recall"]), _f(m["rouge_f1"]),
        _f(m["nrouge_precision"]), _f(m["nrouge_recall"]), _f(m["nrouge_f1"]),
        _f(m["total_tokens"], 1), _f(m["novel_tokens"], 1), _f(100 * m["novel_pct"], 1),
    ]


_METRIC_HEADERS = ("cutoff", "rouge_p", "rouge_r", "rouge_f1",
                   "nrouge_p", "nrouge_r", "nrouge_f1", "total", "novel", "pct")


def render_stats(stats: dict) -> str:
    rows = [
        [row["stage"], row["pairs_in"], row["pairs_out"], row["products_out"]]
        for row in stats["stages"]
    ]
    table = render_table(("stage", "pairs_in", "pairs_out", "products_out"), rows)
    extras = [
        f"novel_token_pairs: {stats['novel_token_pairs']}",
        f"dropped_irrelevant: {stats['dropped_irrelevant']}",
        f"dropped_empty_after_price: {stats['dropped_empty_after_price']}",
        f"dropped_full_match: {stats['dropped_full_match']}",
        f"dropped_empty_query: {stats['dropped_empty_query']}",
    ]
    return table + "\n" + "\n".join(extras) + "\n"


def _write_report(path, payload: dict, text: str, cfg: RunConfig) -> None:
    dump_json(path, payload)
    Path(path).with_suffix(Path(path).suffix + ".txt").write_text(text, encoding="utf-8")
    write_meta(path, cfg.as_dict())


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_ingest(cfg: RunConfig) -> None:
    ratios = _parse_ratios(cfg["ratios"])
    products = load_products(cfg["products"])
    load = load_engagement(cfg["engagement"], min_atc=cfg["min_atc"],
                           known_ids={p.id for p in products},
                           unknown_product=cfg["unknown"])
    split = split_by_product([p.id for p in products], ratios=ratios, seed=cfg["seed"])
    out = Path(cfg["out"])
    write_jsonl(out / "products.jsonl", (p.as_record() for p in products))
    write_jsonl(out / "pairs.jsonl", (p.as_record() for p in load.pairs))
    dump_json(out / "split.json", split.as_record())
    dump_json(out / "ingest_stats.json", {
        "n_products": len(products),
        "n_pairs": len(load.pairs),
        "dropped_below_min_atc": load.dropped_below_min_atc,
        "skipped_unknown_product": load.skipped_unknown_product,
    })
    dump_json(out / "run_config.json", cfg.as_dict())
    print(f"ingest: {len(products)} products, {len(load.pairs)} pairs "
          f"({load.dropped_below_min_atc} below min ATC)")


def _cmd_filter(cfg: RunConfig) -> None:
    in_dir = Path(cfg["in_dir"])
    products = load_products(in_dir / "products.jsonl")
    pairs = load_engagement(in_dir / "pairs.jsonl", min_atc=0).pairs
    if cfg["scorer"] == "external":
        if not cfg.get("scores"):
            raise ConfigError("--scorer external requires --scores PATH")
        scorer = ExternalScorer.load(cfg["scores"])
    else:
        scorer = JaccardScorer()
    result = run_pipeline(pairs, products, PipelineConfig(
        rf_threshold=cfg["rf_threshold"],
        scorer=scorer,
        fmf_enabled=cfg["fmf"] == "on",
    ))
    out = Path(cfg["out"])
    write_jsonl(out / "query_pairs.jsonl", (p.as_record() for p in result.query_pairs))
    write_jsonl(out / "novel_pairs.jsonl", (p.as_record() for p in result.novel_pairs))
    stats = result.stats.as_dict()
    dump_json(out / "pipeline_stats.json", {"config": cfg.as_dict(), **stats})
    (out / "pipeline_stats.txt").write_text(render_stats(stats), encoding="utf-8")
    write_jsonl(out / "products.jsonl", (p.as_record() for p in products))
    split_path = in_dir / "split.json"
    if split_path.exists():
        dump_json(out / "split.json", load_json(split_path))
    dump_json(out / "run_config.json", cfg.as_dict())
    print(f"filter: {len(pairs)} pairs in, {len(result.query_pairs)} query pairs, "
          f"{len(result.novel_pairs)} novel pairs out")


def _cmd_build_targets(cfg: RunConfig) -> None:
    in_dir = Path(cfg["in_dir"])
    products = load_products(in_dir / "products.jsonl")
    novel_pairs = [
        NovelPair.from_record(record)
        for _, record in iter_jsonl(in_dir / "novel_pairs.jsonl")
    ]
    subset = None
    if cfg["split"] != "all":
        split_path = in_dir / "split.json"
        if not split_path.exists():
            raise InputError(f"--split {cfg['split']} needs {split_path}")
        subset = CatalogSplit.from_record(load_json(split_path)).subset(cfg["split"])
    by_product = {}
    for pair in novel_pairs:
        by_product.setdefault(pair.product_id, []).append(pair)
    target_config = TargetConfig(alpha=cfg["alpha"])
    instances = []
    for product in products:
        if subset is not None and product.id not in subset:
            continue
        pairs = by_product.get(product.id)
        if not pairs:
            continue
        targets = build_target_tokens(product, pairs, target_config)
        if targets:
            instances.extend(emit_training_instances(product, targets))
    write_jsonl(cfg["out"], (inst.as_record() for inst in instances))
    write_meta(cfg["out"], cfg.as_dict())
    print(f"build-targets: {len(instances)} training instances "
          f"for {len({i.product_id for i in instances})} products")


def _cmd_train(cfg: RunConfig) -> None:
    products = load_products(cfg["products"])
    instances = load_training_instances(cfg["instances"])
    model = train_cooccurrence(instances, products)
    save_model(model, cfg["out"])
    write_meta(cfg["out"], cfg.as_dict())
    print(f"train: {len(model.vocabulary)} target tokens, "
          f"{len(model.counts)} context tokens")


def _cmd_predict(cfg: RunConfig) -> None:
    predictor = _load_predictor(cfg)
    products = load_products(cfg["products"])
    subset = _split_subset(cfg)
    predictions = {}
    for product in products:
        if subset is not None and product.id not in subset:
            continue
        scored = predictor.predict(product, cfg["top"])
        if scored:
            predictions[product.id] = scored
    n = write_predictions(cfg["out"], predictions)
    write_meta(cfg["out"], cfg.as_dict())
    print(f"predict: {n} scored tokens over {len(predictions)} products")


def _build_eval_records(cfg: RunConfig, products, with_scores: bool):
    grouped = _reference_tokens(cfg, products)
    predictor = load_external_predictions(cfg["predictions"])
    token_sets = {p.id: product_token_set(p).unique for p in products if p.id in grouped}
    records = []
    for pid in sorted(grouped):
        predicted = predictor.predict(pid, cfg["top"])
        if with_scores:
            records.append(ScoredRecord(product_id=pid, reference=tuple(grouped[pid]),
                                        predictions=tuple(predicted)))
        else:
            retained = apply_cutoff(predicted, cfg["cutoff"])
            records.append(make_eval_record(pid, grouped[pid], token_sets[pid],
                                            [st.token for st in retained]))
    return records, token_sets


def _cmd_evaluate(cfg: RunConfig) -> None:
    products = load_products(cfg["products"])
    records, token_sets = _build_eval_records(cfg, products, with_scores=False)
    bootstrap = None
    if cfg["bootstrap"] > 0:
        if cfg.get("seed") is None:
            raise ConfigError("--bootstrap needs an explicit --seed")
        bootstrap = BootstrapConfig(resamples=cfg["bootstrap"], level=cfg["level"],
                                    seed=cfg["seed"])
    report = evaluate_records(records, token_sets, bootstrap=bootstrap)
    payload = {"config": cfg.as_dict(), "metrics": report.as_dict()}
    text = render_table(_METRIC_HEADERS, [render_metrics_row(_f(cfg["cutoff"], 2), report.as_dict())])
    _write_report(cfg["report"], payload, text, cfg)
    print(f"evaluate: n={report.n_products} nrouge_f1={report.nrouge_f1:.4f}")


def _cmd_tune_cutoff(cfg: RunConfig) -> None:
    try:
        candidate_cutoffs([], grid=cfg["grid"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    products = load_products(cfg["products"])
    records, token_sets = _build_eval_records(cfg, products, with_scores=True)
    try:
        sweep = tune_cutoff(records, token_sets, grid=cfg["grid"])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    payload = {
        "config": cfg.as_dict(),
        "chosen": sweep.chosen,
        "chosen_metrics": sweep.chosen_row().report.as_dict(),
        "rows": [{"cutoff": row.cutoff, "metrics": row.report.as_dict()} for row in sweep.rows],
    }
    if cfg.get("budget_target") is not None:
        if cfg["budget_target"] <= 0:
            raise ConfigError("--budget-target must be > 0")
        budget = budget_match_cutoff(records, token_sets, cfg["budget_target"], grid=cfg["grid"])
        payload["budget"] = {
            "target": cfg["budget_target"],
            "cutoff": budget.cutoff,
            "mean_novel": budget.mean_novel,
            "target_reachable": budget.target_reachable,
        }
    rows = [render_metrics_row(_f(row.cutoff, 4), row.report.as_dict()) for row in sweep.rows]
    text = render_table(_METRIC_HEADERS, rows)
    text += f"\nchosen cutoff: {sweep.chosen}\n"
    _write_report(cfg["report"], payload, text, cfg)
    print(f"tune-cutoff: chosen={sweep.chosen} "
          f"nrouge_f1={sweep.chosen_row().report.nrouge_f1:.4f}")


def _cmd_index(cfg: RunConfig) -> None:
    products = load_products(cfg["products"])
    expansions = {}
    if cfg.get("expansions"):
        predictor = load_external_predictions(cfg["expansions"])
        for pid in predictor.product_ids():
            retained = apply_cutoff(predictor.predict(pid, cfg["top"]), cfg["cutoff"])
            if retained:
                expansions[pid] = [st.token for st in retained]
    weights = _parse_field_weights(cfg["field_weights"]) if cfg.get("field_weights") else None
    index = build_index(products, expansions, field_weights=weights,
                        k1=cfg["k1"], b=cfg["b"])
    save_index(index, cfg["out"])
    write_meta(cfg["out"], cfg.as_dict())
    print(f"index: {index.doc_count} documents, "
          f"{sum(len(f.postings) for f in index.fields.values())} postings lists")


def _cmd_search(cfg: RunConfig) -> None:
    index = load_index(cfg["index"])
    result = search(index, cfg["query"], cfg["k"])
    rows = [[rank, doc_id, _f(score, 6)]
            for rank, (doc_id, score) in enumerate(result.hits, start=1)]
    print(render_table(("rank", "doc_id", "score"), rows), end="")
    if cfg.get("out"):
        dump_json(cfg["out"], {
            "config": cfg.as_dict(),
            "hits": [{"doc_id": d, "score": s} for d, s in result.hits],
        })
        write_meta(cfg["out"], cfg.as_dict())


def _cmd_eval_retrieval(cfg: RunConfig) -> None:
    index = load_index(cfg["index"])
    pairs = load_engagement(cfg["pairs"], min_atc=0).pairs
    report = eval_recall(index, pairs, cfg["k"])
    payload = {"config": cfg.as_dict(), "recall": report.recall, "hits": report.hits,
               "total": report.total, "k": cfg["k"], "defined": report.defined}
    text = render_table(("k", "recall", "hits", "total"),
                        [[cfg["k"], _f(report.recall), report.hits, report.total]])
    _write_report(cfg["report"], payload, text, cfg)
    print(f"eval-retrieval: recall@{cfg['k']}={report.recall:.4f} "
          f"({report.hits}/{report.total})")


def _cmd_report(cfg: RunConfig) -> None:
    in_dir = Path(cfg["in_dir"])
    if not in_dir.is_dir():
        raise InputError(f"not a directory: {in_dir}")
    merged = {"config": cfg.as_dict(), "preprocessing": [], "evaluations": [],
              "cutoff_sweeps": [], "retrieval": []}
    for path in sorted(in_dir.rglob("*.json")):
        if path.name.endswith(".meta.json") or path.name == "run_config.json":
            continue
        try:
            data = load_json(path)
        except InputError:
            continue
        if not isinstance(data, dict):
            continue
        entry = {"source": str(path.relative_to(in_dir)), **data}
        if "stages" in data:
            merged["preprocessing"].append(entry)
        elif "rows" in data and "chosen" in data:
            merged["cutoff_sweeps"].append(entry)
        elif "metrics" in data:
            merged["evaluations"].append(entry)
        elif "recall" in data:
            merged["retrieval"].append(entry)
    sections = []
    for entry in merged["preprocessing"]:
        sections.append(f"== preprocessing ({entry['source']})\n" + render_stats(entry))
    eval_rows = [render_metrics_row(e["source"], e["metrics"]) for e in merged["evaluations"]]
    eval_rows += [render_metrics_row(f"{e['source']} (chosen {e['chosen']})", e["chosen_metrics"])
                  for e in merged["cutoff_sweeps"]]
    if eval_rows:
        sections.append("== evaluations\n" + render_table(("source",) + _METRIC_HEADERS[1:], eval_rows))
    if merged["retrieval"]:
        rows = [[e["source"], e["k"], _f(e["recall"]), e["hits"], e["total"]]
                for e in merged["retrieval"]]
        sections.append("== retrieval\n" + render_table(("source", "k", "recall", "hits", "total"), rows))
    _write_report(cfg["out"], merged, "\n".join(sections) + "\n", cfg)
    print(f"report: {len(merged['preprocessing'])} preprocessing, "
          f"{len(merged['evaluations'])} evaluations, "
          f"{len(merged['cutoff_sweeps'])} sweeps, "
          f"{len(merged['retrieval'])} retrieval sections")


def _cmd_gen_synthetic(cfg: RunConfig) -> None:
    corpus = generate(SyntheticConfig(seed=cfg["seed"], n_products=cfg["products"],
                                      n_heldout=cfg["heldout"]))
    written = write_corpus(corpus, cfg["out"])
    dump_json(Path(cfg["out"]) / "run_config.json", cfg.as_dict())
    print("gen-synthetic: " + ", ".join(f"{name}={count}" for name, count in sorted(written.items())))


HANDLERS = {
    "ingest": _cmd_ingest,
    "filter": _cmd_filter,
    "build-targets": _cmd_build_targets,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "tune-cutoff": _cmd_tune_cutoff,
    "index": _cmd_index,
    "search": _cmd_search,
    "eval-retrieval": _cmd_eval_retrieval,
    "report": _cmd_report,
    "gen-synthetic": _cmd_gen_synthetic,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        config = resolve_config(args)
        HANDLERS[args.subcommand](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
