"""Command line front end.

One subcommand per pipeline stage, staged through files so every step
can be inspected and rerun:

    ingest -> match-props -> pairs -> simtable -> train -> recognize
           -> extend -> assess -> report

Options layer as defaults < config file < ``--set key=value`` <
dedicated flags.  Exit codes: 0 on success, 1 for any toolkit error
(bad input, missing file, conflicting ids), 2 for usage errors and
unexpected internal failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Mapping, Sequence

from . import alignments as al
from . import assess as assess_mod
from .config import RunConfig, load_config, parse_overrides, resolve
from .errors import ConfigError, KgError, LayoutMismatchError
from .extend import (
    ExtensionPlan,
    extend as extend_graphs,
    save_extension_csv,
    save_extension_json,
)
from .fca import ConceptRef, formalize, save_context
from .ingest import (
    default_stopwords,
    graph_from_triples,
    load_graph_json,
    load_stopwords,
    parse_ntriples,
    parse_turtle_subset,
    save_graph_json,
)
from .lexsim import EmbeddingStore, SemanticStores, TaxonomyStore
from .matcher import (
    ETYPE_ENTITY,
    ETYPE_ETYPE,
    gen_pairs,
    load_pairs_csv,
    match_properties,
    prune_instance,
    prune_schema,
    save_pairs_csv,
)
from .model import KnowledgeGraph
from .propsim import (
    build_specificity,
    load_sim_csv,
    normalize_batch,
    save_sim_csv,
    sim_table,
)
from .recognizer import (
    INSTANCE,
    INSTANCE_FEATURES,
    SCHEMA,
    SCHEMA_FEATURES,
    ConstantModel,
    FeatureContext,
    ThresholdModel,
    balance,
    feature_names,
    featurize_pairs,
    load_model,
    predict,
    save_features_csv,
    save_model,
    sim_lookup,
    train_gbt,
    train_logreg,
    train_tree,
)
from .text import StopwordList

_COMMON_KEYS = {"stopwords": "paths.stopwords", "seed": "seed", "threads": "threads"}


def _add_common(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration")
    group.add_argument("--config", metavar="FILE", help="read key = value defaults from FILE")
    group.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one configuration key (repeatable)",
    )
    group.add_argument("--stopwords", metavar="FILE", help="stop-word list, one word per line")
    group.add_argument("--seed", type=int, metavar="N", help="random seed recorded in models")
    group.add_argument("--threads", type=int, metavar="N", help="worker threads for similarity scoring")


def _resolve_config(args: argparse.Namespace, flag_keys: Mapping[str, str]) -> RunConfig:
    """Layer defaults, config file, --set pairs, and explicit flags."""
    file_layer: dict[str, object] = {}
    if args.config:
        file_layer = load_config(args.config)
    set_layer = parse_overrides(args.overrides)
    flag_layer: dict[str, object] = {}
    for attr, key in {**_COMMON_KEYS, **flag_keys}.items():
        value = getattr(args, attr, None)
        if value is not None:
            flag_layer[key] = value
    return resolve(file_layer, set_layer, flag_layer)


def _stopword_list(cfg: RunConfig) -> StopwordList:
    path = cfg.str_("paths.stopwords")
    return load_stopwords(path) if path else default_stopwords()


def _load_graph(path: str, cfg: RunConfig, what: str) -> KnowledgeGraph:
    if not path:
        raise ConfigError(f"missing {what} graph path")
    return load_graph_json(path, stopwords=_stopword_list(cfg))


def _embeddings(cfg: RunConfig) -> EmbeddingStore | None:
    path = cfg.str_("paths.embeddings")
    return EmbeddingStore.load(path) if path else None


def _taxonomy(cfg: RunConfig) -> TaxonomyStore | None:
    path = cfg.str_("paths.taxonomy")
    return TaxonomyStore.load(path) if path else None


def _out_path(cfg: RunConfig, flag_value: str | None) -> str:
    path = flag_value or cfg.str_("paths.out")
    if not path:
        raise ConfigError("missing output path (--out or paths.out)")
    return path


def _out_dir(cfg: RunConfig, flag_value: str | None) -> str:
    path = flag_value or cfg.str_("paths.out")
    if not path:
        raise ConfigError("missing output directory (--out-dir or paths.out)")
    os.makedirs(path, exist_ok=True)
    return path


def _say(path: str) -> None:
    print(f"wrote {path}")


def _theta(cfg: RunConfig) -> float | None:
    # 0 stands for "derive from the graph depth".
    value = cfg.float_("propsim.theta")
    return None if value == 0.0 else value


def _contexts_for(kind: str, ref: KnowledgeGraph, cand: KnowledgeGraph):
    fa = formalize(ref, "schema")
    fb = formalize(cand, "schema" if kind == ETYPE_ETYPE else "instance")
    return fa, fb


def _model_kind(model) -> str:
    if tuple(model.feature_names) == SCHEMA_FEATURES:
        return SCHEMA
    if tuple(model.feature_names) == INSTANCE_FEATURES:
        return INSTANCE
    raise LayoutMismatchError("model feature layout matches neither schema nor instance features")


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args, {"out": "paths.out"})
    fmt = args.format
    if fmt == "auto":
        ext = os.path.splitext(args.input)[1].lower()
        fmt = {".nt": "nt", ".ttl": "ttl", ".json": "json"}.get(ext, "")
        if not fmt:
            raise ConfigError(f"cannot guess the format of {args.input!r}; pass --format")
    name = args.name or os.path.splitext(os.path.basename(args.input))[0]
    stops = _stopword_list(cfg)
    if fmt == "json":
        g = load_graph_json(args.input, stopwords=stops)
    else:
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise KgError(f"cannot read {args.input!r}: {exc}") from exc
        if fmt == "nt":
            triples = parse_ntriples(text, strict=not args.lenient)
        else:
            triples = parse_turtle_subset(text)
        g = graph_from_triples(name, triples, stopwords=stops)
    out = _out_path(cfg, args.out)
    save_graph_json(g, out)
    print(f"ingested {len(g.etypes)} types, {len(g.entities)} entities, {len(g.properties)} properties")
    _say(out)
    return 0


def _cmd_formalize(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args, {"out": "paths.out"})
    g = load_graph_json(args.graph, stopwords=_stopword_list(cfg))
    ctx = formalize(g, args.scope)
    out = _out_path(cfg, args.out)
    save_context(ctx, out)
    print(f"formalized {len(ctx.concepts)} concepts x {len(ctx.properties)} properties ({args.scope})")
    _say(out)
    return 0


def _cmd_match_props(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "embeddings": "paths.embeddings",
            "tau": "matcher.tau",
            "out": "paths.out",
        },
    )
    ref = _load_graph(cfg.str_("paths.ref"), cfg, "reference")
    cand = _load_graph(cfg.str_("paths.cand"), cfg, "candidate")
    aligned = match_properties(ref, cand, cfg.float_("matcher.tau"), embeddings=_embeddings(cfg))
    out = _out_path(cfg, args.out)
    al.save_alignments(aligned, out)
    print(f"aligned {len(aligned)} property pairs at tau={cfg.float_('matcher.tau')}")
    _say(out)
    return 0


def _cmd_pairs(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "embeddings": "paths.embeddings",
            "ps_threshold": "matcher.ps_threshold",
            "out": "paths.out",
        },
    )
    ref = _load_graph(cfg.str_("paths.ref"), cfg, "reference")
    cand = _load_graph(cfg.str_("paths.cand"), cfg, "candidate")
    pairs = gen_pairs(ref, cand, args.kind)
    dropped = 0
    if args.prune:
        if args.kind == ETYPE_ETYPE:
            pruned = prune_schema(
                ref, cand, pairs, cfg.float_("matcher.ps_threshold"), embeddings=_embeddings(cfg)
            )
        else:
            if not args.pm:
                raise ConfigError("pruning etype-entity pairs needs --pm property alignments")
            pm = al.load_alignments(args.pm)
            fa, fb = _contexts_for(args.kind, ref, cand)
            pruned = prune_instance(pairs, pm, fa, fb)
        pairs = pruned.kept
        dropped = len(pruned.dropped)
    out = _out_path(cfg, args.out)
    save_pairs_csv(pairs, out)
    print(f"kept {len(pairs)} {args.kind} pairs, dropped {dropped}")
    _say(out)
    return 0


def _cmd_simtable(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "lam": "propsim.lam",
            "theta": "propsim.theta",
            "counts": "propsim.counts",
            "out_dir": "paths.out",
        },
    )
    ref = _load_graph(cfg.str_("paths.ref"), cfg, "reference")
    cand = _load_graph(cfg.str_("paths.cand"), cfg, "candidate")
    pairs = load_pairs_csv(args.pairs)
    pm = al.load_alignments(args.pm) if args.pm else []
    fa, fb = _contexts_for(pairs.kind, ref, cand)
    counts = cfg.str_("propsim.counts")
    lam = cfg.float_("propsim.lam")
    theta = _theta(cfg)
    table_a = build_specificity(ref, counts, lam, theta)
    table_b = build_specificity(cand, counts, lam, theta)
    raw = sim_table(fa, fb, pm, pairs.pairs, table_a, table_b, threads=cfg.int_("threads"))
    out_dir = _out_dir(cfg, args.out_dir)
    raw_path = os.path.join(out_dir, "sims-raw.csv")
    norm_path = os.path.join(out_dir, "sims-normalized.csv")
    save_sim_csv(raw, "raw", raw_path)
    save_sim_csv(normalize_batch(raw), "normalized", norm_path)
    print(f"scored {len(raw)} pairs with {len(pm)} aligned properties")
    _say(raw_path)
    _say(norm_path)
    return 0


def _load_sims(path: str, kind: str):
    right_kind = "etype" if kind == ETYPE_ETYPE else "entity"
    _variant, triples = load_sim_csv(path, "etype", right_kind)
    return sim_lookup(triples)


def _feature_data(cfg: RunConfig, args: argparse.Namespace, kind: str, gold=None):
    ref = _load_graph(cfg.str_("paths.ref"), cfg, "reference")
    cand = _load_graph(cfg.str_("paths.cand"), cfg, "candidate")
    pairs = load_pairs_csv(args.pairs)
    sims = _load_sims(args.sims, pairs.kind)
    stores = SemanticStores(_taxonomy(cfg), _embeddings(cfg))
    ctx = FeatureContext(ref, cand, sims, stores)
    labels = None
    if gold is not None:
        right_kind = "etype" if pairs.kind == ETYPE_ETYPE else "entity"
        labels = {
            (ConceptRef("etype", a.left), ConceptRef(right_kind, a.right)): 1 for a in gold
        }
    return pairs, featurize_pairs(pairs.pairs, ctx, kind, labels)


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "embeddings": "paths.embeddings",
            "taxonomy": "paths.taxonomy",
            "kind": "recognizer.kind",
            "model": "model.kind",
            "lr": "model.lr",
            "epochs": "model.epochs",
            "l2": "model.l2",
            "rounds": "model.rounds",
            "depth": "model.depth",
            "shrinkage": "model.shrinkage",
            "max_depth": "model.max_depth",
            "min_leaf": "model.min_leaf",
            "feature": "model.feature",
            "value": "model.value",
            "balance": "train.balance",
            "balance_ratio": "train.balance_ratio",
            "out_dir": "paths.out",
        },
    )
    kind = cfg.str_("recognizer.kind")
    if kind not in (SCHEMA, INSTANCE):
        raise ConfigError(f"recognizer.kind must be schema or instance, not {kind!r}")
    gold = al.load_alignments(args.gold)
    _pairs, labeled = _feature_data(cfg, args, kind, gold)
    seed = cfg.int_("seed")
    if cfg.bool_("train.balance"):
        labeled = balance(labeled, cfg.float_("train.balance_ratio"), seed)
    names = feature_names(kind)
    model_kind = cfg.str_("model.kind")
    if model_kind == "logreg":
        model = train_logreg(
            labeled,
            cfg.float_("model.lr"),
            cfg.int_("model.epochs"),
            cfg.float_("model.l2"),
            seed,
            feature_names=names,
        )
    elif model_kind == "tree":
        model = train_tree(
            labeled, cfg.int_("model.max_depth"), cfg.int_("model.min_leaf"), seed, feature_names=names
        )
    elif model_kind == "gbt":
        model = train_gbt(
            labeled,
            cfg.int_("model.rounds"),
            cfg.int_("model.depth"),
            cfg.float_("model.shrinkage"),
            seed,
            feature_names=names,
        )
    elif model_kind == "threshold":
        model = ThresholdModel(names, cfg.str_("model.feature"))
    elif model_kind == "constant":
        model = ConstantModel(names, cfg.float_("model.value"))
    else:
        raise ConfigError(f"unknown model kind {model_kind!r}")
    out_dir = _out_dir(cfg, args.out_dir)
    model_path = os.path.join(out_dir, "model.json")
    features_path = os.path.join(out_dir, "train-features.csv")
    save_model(model, model_path)
    save_features_csv(labeled, kind, features_path)
    positives = sum(1 for p in labeled if p.label == 1)
    print(
        f"trained {model_kind} on {len(labeled)} pairs "
        f"({positives} positive) with {len(names)} {kind} features"
    )
    _say(model_path)
    _say(features_path)
    return 0


def _cmd_recognize(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "embeddings": "paths.embeddings",
            "taxonomy": "paths.taxonomy",
            "cutoff": "model.cutoff",
            "out": "paths.out",
        },
    )
    model = load_model(args.model)
    kind = _model_kind(model)
    pairs, data = _feature_data(cfg, args, kind)
    relation = al.EQUIV if pairs.kind == ETYPE_ETYPE else al.MEMBER
    cutoff = cfg.float_("model.cutoff")
    accepted = []
    for p in data:
        label, score = predict(model, p.features, cutoff)
        if label == 1:
            accepted.append(al.Alignment(p.left.id, p.right.id, relation, score))
    out = _out_path(cfg, args.out)
    al.save_alignments(accepted, out)
    print(f"recognized {len(accepted)} of {len(data)} pairs at cutoff {cutoff}")
    _say(out)
    return 0


def _cmd_extend(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "ref": "paths.ref",
            "cand": "paths.cand",
            "cutoff": "model.cutoff",
            "conflicts": "extend.conflicts",
            "keep_unaligned_etypes": "extend.keep_unaligned_etypes",
            "out_dir": "paths.out",
        },
    )
    ref = _load_graph(cfg.str_("paths.ref"), cfg, "reference")
    cand = _load_graph(cfg.str_("paths.cand"), cfg, "candidate")
    etype_alignments = tuple(al.load_alignments(args.alignments))
    pm = tuple(al.load_alignments(args.pm)) if args.pm else ()
    model = load_model(args.model) if args.model else None
    plan = ExtensionPlan(
        etype_alignments=etype_alignments,
        model=model,
        property_alignments=pm,
        conflict_policy=cfg.str_("extend.conflicts"),
        keep_unaligned_etypes=cfg.bool_("extend.keep_unaligned_etypes"),
        cutoff=cfg.float_("model.cutoff"),
    )
    ext, report = extend_graphs(ref, cand, plan)
    out_dir = _out_dir(cfg, args.out_dir)
    graph_path = os.path.join(out_dir, "extended.json")
    csv_path = os.path.join(out_dir, "extension.csv")
    json_path = os.path.join(out_dir, "extension.json")
    save_graph_json(ext, graph_path)
    save_extension_csv(report, csv_path)
    save_extension_json(report, json_path)
    c = report.counts
    print(
        f"extended {ref.name} with {c.etypes_added} types, {c.properties_added} properties; "
        f"merged {c.entities_merged}, discarded {c.entities_discarded} entities"
    )
    _say(graph_path)
    _say(csv_path)
    _say(json_path)
    return 0


def _cmd_assess(args: argparse.Namespace) -> int:
    cfg = _resolve_config(
        args,
        {
            "query": "assess.query",
            "eta": "assess.eta",
            "mu": "assess.mu",
            "alpha": "assess.alpha",
            "beta": "assess.beta",
            "out_dir": "paths.out",
        },
    )
    stops = _stopword_list(cfg)
    corpus = [load_graph_json(path, stopwords=stops) for path in args.graphs]
    query_text = cfg.str_("assess.query")
    query = assess_mod.parse_query(query_text, stops) if query_text else None
    report = assess_mod.build_report(
        corpus,
        query,
        eta=cfg.float_("assess.eta"),
        mu=cfg.float_("assess.mu"),
        alpha=cfg.float_("assess.alpha"),
        beta=cfg.float_("assess.beta"),
    )
    out_dir = _out_dir(cfg, args.out_dir)
    csv_path = os.path.join(out_dir, "assessment.csv")
    json_path = os.path.join(out_dir, "assessment.json")
    assess_mod.save_report_csv(report, csv_path)
    assess_mod.save_report_json(report, json_path)
    print(f"assessed {len(corpus)} graphs, {len(report.etypes)} ranked types")
    _say(csv_path)
    _say(json_path)
    return 0


# ---------------------------------------------------------------------------
# Aggregated report


def _read_json(path: str) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise KgError(f"cannot read {path!r}: {exc}") from exc


def _summarize_alignments(path: str) -> dict:
    rows = al.load_alignments(path)
    by_relation: dict[str, int] = {}
    for a in rows:
        by_relation[a.relation] = by_relation.get(a.relation, 0) + 1
    mean_conf = sum(a.confidence for a in rows) / len(rows) if rows else 0.0
    return {
        "count": len(rows),
        "by_relation": dict(sorted(by_relation.items())),
        "mean_confidence": mean_conf,
    }


def _summarize_model(path: str) -> dict:
    model = load_model(path)
    return {
        "kind": model.kind,
        "features": list(model.feature_names),
        "recognizes": _model_kind(model),
    }


def _summarize_sims(path: str) -> dict:
    variant, triples = load_sim_csv(path)
    summary: dict[str, object] = {"variant": variant, "pairs": len(triples)}
    for name in ("sim_h", "sim_v", "sim_i"):
        values = [getattr(t, name) for t in triples]
        if values:
            summary[name] = {
                "min": min(values),
                "mean": sum(values) / len(values),
                "max": max(values),
            }
    return summary


def _cmd_report(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args, {"out_dir": "paths.out"})
    sections: dict[str, object] = {}
    if args.alignments:
        sections["alignments"] = _summarize_alignments(args.alignments)
    if args.model:
        sections["model"] = _summarize_model(args.model)
    if args.sims:
        sections["sims"] = _summarize_sims(args.sims)
    if args.extension:
        sections["extension"] = _read_json(args.extension)
    if args.assessment:
        sections["assessment"] = _read_json(args.assessment)
    if not sections:
        raise ConfigError("report needs at least one artifact flag")
    out_dir = _out_dir(cfg, args.out_dir)
    json_path = os.path.join(out_dir, "report.json")
    md_path = os.path.join(out_dir, "report.md")
    payload = json.dumps(sections, indent=2, ensure_ascii=False) + "\n"
    try:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
        with open(md_path, "w", encoding="utf-8") as fh:
            fh.write(_render_markdown(sections))
    except OSError as exc:
        raise KgError(f"cannot write report: {exc}") from exc
    print(f"built report from {len(sections)} artifacts")
    _say(json_path)
    _say(md_path)
    return 0


def _render_markdown(sections: Mapping[str, object]) -> str:
    lines = ["# Pipeline report", ""]
    if "alignments" in sections:
        a = sections["alignments"]
        lines += ["## Alignments", ""]
        lines.append(f"- pairs: {a['count']}")
        for rel, n in a["by_relation"].items():
            lines.append(f"- relation `{rel}`: {n}")
        lines.append(f"- mean confidence: {a['mean_confidence']:.4f}")
        lines.append("")
    if "model" in sections:
        m = sections["model"]
        lines += ["## Model", ""]
        lines.append(f"- kind: {m['kind']}")
        lines.append(f"- recognizes: {m['recognizes']} pairs")
        lines.append(f"- features: {len(m['features'])}")
        lines.append("")
    if "sims" in sections:
        s = sections["sims"]
        lines += ["## Similarities", ""]
        lines.append(f"- variant: {s['variant']}, pairs: {s['pairs']}")
        for name in ("sim_h", "sim_v", "sim_i"):
            if name in s:
                v = s[name]
                lines.append(
                    f"- {name}: min {v['min']:.4f}, mean {v['mean']:.4f}, max {v['max']:.4f}"
                )
        lines.append("")
    if "extension" in sections:
        e = sections["extension"]
        counts = e.get("counts", {})
        lines += ["## Extension", ""]
        for key in ("etypes_added", "properties_added", "entities_merged", "entities_discarded"):
            if key in counts:
                lines.append(f"- {key.replace('_', ' ')}: {counts[key]}")
        metrics = e.get("metrics", [])
        if metrics:
            lines += ["", "| type | metric | before | after |", "|---|---|---|---|"]
            for row in metrics:
                lines.append(
                    f"| {row['etype']} | {row['metric']} | {row['before']:.4f} | {row['after']:.4f} |"
                )
        lines.append("")
    if "assessment" in sections:
        a = sections["assessment"]
        graphs = a.get("graphs", [])
        lines += ["## Assessment", ""]
        if graphs:
            lines += ["| graph | focus | balance | cmm | dem |", "|---|---|---|---|---|"]
            for row in graphs:
                lines.append(
                    f"| {row['graph']} | {row['focus_k']:.4f} | {row['balance']:.4f} "
                    f"| {row['cmm']:.4f} | {row['dem']:.4f} |"
                )
        lines.append("")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgextend",
        description="Align, extend, and assess knowledge graphs from the command line.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="convert N-Triples, Turtle, or JSON input to a graph file")
    p.add_argument("input", help="source file (.nt, .ttl, or .json)")
    p.add_argument("--format", choices=["auto", "nt", "ttl", "json"], default="auto")
    p.add_argument("--name", help="graph name for triple inputs (default: input file stem)")
    p.add_argument("--lenient", action="store_true", help="skip malformed N-Triples lines")
    p.add_argument("-o", "--out", metavar="FILE", help="output graph JSON")
    _add_common(p)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("formalize", help="derive the three-valued property context of a graph")
    p.add_argument("graph", help="graph JSON file")
    p.add_argument("--scope", choices=["schema", "instance", "both"], default="schema")
    p.add_argument("-o", "--out", metavar="FILE", help="output context CSV")
    _add_common(p)
    p.set_defaults(handler=_cmd_formalize)

    p = sub.add_parser("match-props", help="align properties of two graphs by label similarity")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--tau", type=float, metavar="T", help="acceptance threshold")
    p.add_argument("--embeddings", metavar="FILE", help="word vector table")
    p.add_argument("-o", "--out", metavar="FILE", help="output alignments TSV")
    _add_common(p)
    p.set_defaults(handler=_cmd_match_props)

    p = sub.add_parser("pairs", help="enumerate and optionally prune candidate concept pairs")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--kind", choices=[ETYPE_ETYPE, ETYPE_ENTITY], default=ETYPE_ETYPE)
    p.add_argument("--prune", action="store_true", help="drop obvious negatives")
    p.add_argument("--ps-threshold", dest="ps_threshold", type=float, metavar="T")
    p.add_argument("--pm", metavar="FILE", help="property alignments (needed to prune entity pairs)")
    p.add_argument("--embeddings", metavar="FILE", help="word vector table")
    p.add_argument("-o", "--out", metavar="FILE", help="output pairs CSV")
    _add_common(p)
    p.set_defaults(handler=_cmd_pairs)

    p = sub.add_parser("simtable", help="score structural similarity for staged pairs")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--pairs", required=True, metavar="FILE", help="pairs CSV from the pairs command")
    p.add_argument("--pm", metavar="FILE", help="property alignments TSV")
    p.add_argument("--lam", type=float, metavar="L", help="horizontal decay rate")
    p.add_argument("--theta", type=float, metavar="T", help="layer weight; 0 derives it from depth")
    p.add_argument("--counts", choices=["schema", "instance"], default=None, help="weighting for the entropy component")
    p.add_argument("--out-dir", dest="out_dir", metavar="DIR", help="directory for sims-raw.csv and sims-normalized.csv")
    _add_common(p)
    p.set_defaults(handler=_cmd_simtable)

    p = sub.add_parser("train", help="fit a recognizer on gold alignments")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--pairs", required=True, metavar="FILE", help="pairs CSV")
    p.add_argument("--sims", required=True, metavar="FILE", help="normalized similarity CSV")
    p.add_argument("--gold", required=True, metavar="FILE", help="true alignments TSV")
    p.add_argument("--kind", choices=[SCHEMA, INSTANCE], default=None, help="feature set")
    p.add_argument(
        "--model",
        choices=["logreg", "tree", "gbt", "threshold", "constant"],
        default=None,
        help="classifier family",
    )
    p.add_argument("--lr", type=float, metavar="R", help="logreg learning rate")
    p.add_argument("--epochs", type=int, metavar="N", help="logreg epochs")
    p.add_argument("--l2", type=float, metavar="L", help="logreg ridge penalty")
    p.add_argument("--rounds", type=int, metavar="N", help="boosting rounds")
    p.add_argument("--depth", type=int, metavar="D", help="boosted tree depth")
    p.add_argument("--shrinkage", type=float, metavar="S", help="boosting step size")
    p.add_argument("--max-depth", dest="max_depth", type=int, metavar="D", help="decision tree depth cap")
    p.add_argument("--min-leaf", dest="min_leaf", type=int, metavar="N", help="decision tree leaf minimum")
    p.add_argument("--feature", metavar="NAME", help="feature read by the threshold model")
    p.add_argument("--value", type=float, metavar="V", help="score of the constant model")
    p.add_argument(
        "--balance",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="oversample positives before training",
    )
    p.add_argument("--balance-ratio", dest="balance_ratio", type=float, metavar="R")
    p.add_argument("--embeddings", metavar="FILE", help="word vector table")
    p.add_argument("--taxonomy", metavar="FILE", help="term hierarchy for semantic features")
    p.add_argument("--out-dir", dest="out_dir", metavar="DIR", help="directory for model.json and train-features.csv")
    _add_common(p)
    p.set_defaults(handler=_cmd_train)

    p = sub.add_parser("recognize", help="classify staged pairs with a trained model")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--pairs", required=True, metavar="FILE", help="pairs CSV")
    p.add_argument("--sims", required=True, metavar="FILE", help="normalized similarity CSV")
    p.add_argument("--model", required=True, metavar="FILE", help="trained model JSON")
    p.add_argument("--cutoff", type=float, metavar="C", help="acceptance score")
    p.add_argument("--embeddings", metavar="FILE", help="word vector table")
    p.add_argument("--taxonomy", metavar="FILE", help="term hierarchy for semantic features")
    p.add_argument("-o", "--out", metavar="FILE", help="output alignments TSV")
    _add_common(p)
    p.set_defaults(handler=_cmd_recognize)

    p = sub.add_parser("extend", help="fold a candidate graph into the reference along alignments")
    p.add_argument("--ref", metavar="FILE", help="reference graph JSON")
    p.add_argument("--cand", metavar="FILE", help="candidate graph JSON")
    p.add_argument("--alignments", required=True, metavar="FILE", help="type alignments TSV")
    p.add_argument("--pm", metavar="FILE", help="property alignments TSV")
    p.add_argument("--model", metavar="FILE", help="instance recognizer for leftover entities")
    p.add_argument("--cutoff", type=float, metavar="C", help="leftover acceptance score")
    p.add_argument("--conflicts", choices=["strict", "rename"], default=None)
    p.add_argument(
        "--keep-unaligned-etypes",
        dest="keep_unaligned_etypes",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="attach candidate types with no aligned ancestor",
    )
    p.add_argument("--out-dir", dest="out_dir", metavar="DIR", help="directory for the extended graph and reports")
    _add_common(p)
    p.set_defaults(handler=_cmd_extend)

    p = sub.add_parser("assess", help="rank graphs and types by categorization quality")
    p.add_argument("graphs", nargs="+", metavar="GRAPH", help="graph JSON files")
    p.add_argument("--query", metavar="TERMS", help="comma-separated query terms")
    p.add_argument("--eta", type=float, metavar="E", help="cue ratio weight in type focus")
    p.add_argument("--mu", type=float, metavar="M", help="cue ratio weight in graph focus")
    p.add_argument("--alpha", type=float, metavar="A", help="exact match weight")
    p.add_argument("--beta", type=float, metavar="B", help="partial match weight")
    p.add_argument("--out-dir", dest="out_dir", metavar="DIR", help="directory for assessment.csv and assessment.json")
    _add_common(p)
    p.set_defaults(handler=_cmd_assess)

    p = sub.add_parser("report", help="summarize pipeline artifacts into one report")
    p.add_argument("--alignments", metavar="FILE", help="alignments TSV")
    p.add_argument("--model", metavar="FILE", help="model JSON")
    p.add_argument("--sims", metavar="FILE", help="similarity CSV")
    p.add_argument("--extension", metavar="FILE", help="extension JSON")
    p.add_argument("--assessment", metavar="FILE", help="assessment JSON")
    p.add_argument("--out-dir", dest="out_dir", metavar="DIR", help="directory for report.json and report.md")
    _add_common(p)
    p.set_defaults(handler=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except KgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
