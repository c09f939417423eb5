"""Command-line entry point wiring the full pipeline.

Subcommands: preprocess, learn, elicit, validate, metrics, query, compare.
Exit codes: 0 success, 1 domain error (single machine-parseable line on
stderr), 2 usage error (argparse). Reruns with identical inputs produce
byte-identical artifacts; no timestamps are written into outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import discovery, validation
from .bayesnet import BayesNet, Evidence, all_marginals, fit_cpts, posterior
from .data import BinsConfig, DataTable, preprocess
from .elicitation import PromptContext, run_protocol, transcript_structure
from .errors import CausalError, ConfigError, MissingFileError
from .graph import Dag, StructureFile, to_dot
from .transport import load_transport
from .validation import EntropyReport, compare_methods


@dataclass
class PipelineConfig:
    """Shared settings; subcommand flags override these field by field."""

    data: str | None = None
    bins: str | None = None
    drop: list[str] = field(default_factory=list)
    smoothing: float = 1.0
    alpha: float = 0.05
    mi_threshold: float = 0.01
    max_cond: int = 2
    outlier_policy: str = "iqr"
    iqr_multiplier: float = 1.5
    proposer: str | None = None
    verifier: str | None = None
    out_dir: str = "out"

    def __post_init__(self):
        if self.smoothing < 0:
            raise ConfigError("smoothing must be >= 0")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0, 1)")
        if self.mi_threshold < 0:
            raise ConfigError("mi_threshold must be >= 0")
        if self.outlier_policy not in ("iqr", "none"):
            raise ConfigError(f"unknown outlier policy {self.outlier_policy!r}")

    @staticmethod
    def load(path: str | Path) -> "PipelineConfig":
        p = Path(path)
        if not p.exists():
            raise MissingFileError(str(p))
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        known = {f.name for f in fields(PipelineConfig)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return PipelineConfig(**doc)


def _config(args: argparse.Namespace) -> PipelineConfig:
    if getattr(args, "config", None):
        return PipelineConfig.load(args.config)
    return PipelineConfig()


def _pick(flag_value, config_value):
    return flag_value if flag_value is not None else config_value


def _out_path(cfg: PipelineConfig, explicit: str | None, default_name: str) -> Path:
    if explicit is not None:
        path = Path(explicit)
    else:
        path = Path(cfg.out_dir) / default_name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _load_table(cfg: PipelineConfig, data: str | None, bins: str | None) -> DataTable:
    data_path = _pick(data, cfg.data)
    if data_path is None:
        raise ConfigError("no data path given (flag --data or config 'data')")
    bins_path = _pick(bins, cfg.bins)
    bins_config = BinsConfig.load(bins_path) if bins_path else BinsConfig()
    if cfg.drop:
        bins_config.drop = list(dict.fromkeys(bins_config.drop + cfg.drop))
    return preprocess(
        data_path, bins_config,
        outlier_policy=cfg.outlier_policy, iqr_multiplier=cfg.iqr_multiplier,
    )


def _parse_evidence(text: str | None) -> Evidence:
    if not text:
        return Evidence()
    assignments = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"evidence entry {part!r} is not name=level")
        name, _, level = part.partition("=")
        assignments[name.strip()] = level.strip()
    return Evidence(assignments)


# --- subcommands ---------------------------------------------------------------

def _cmd_preprocess(args) -> int:
    cfg = _config(args)
    table = _load_table(cfg, args.data, args.bins)
    out = _out_path(cfg, args.out, "table.json")
    table.save(out)
    print(f"wrote {out} ({table.n_rows} rows, {len(table.columns)} columns)")
    return 0


def _cmd_learn(args) -> int:
    cfg = _config(args)
    table = _load_table(cfg, args.data, args.bins)
    out = _out_path(cfg, args.out, f"structure_{args.method}.json")

    if args.method == "bic":
        smoothing = _pick(args.smoothing, cfg.smoothing)
        init = Dag(list(table.names))
        scored = discovery.hill_climb(
            table, init, max_iters=args.max_iters, smoothing=smoothing
        )
        structure = StructureFile.from_dag(scored.dag, name=args.name, provenance="bic")
        structure.save(out)
        print(f"wrote {out} ({scored.dag.n_edges} edges, BIC {scored.score:.4f})")
        return 0

    threshold = _pick(args.mi_threshold, cfg.mi_threshold)
    max_cond = _pick(args.max_cond, cfg.max_cond)
    skeleton = discovery.miic_skeleton(
        table, mi_threshold=threshold, max_condition_size=max_cond
    )
    # the skeleton is undirected; orient each surviving pair from the
    # lexicographically smaller name as a declared placeholder direction
    dag = Dag(list(table.names))
    for a, b in sorted(skeleton.edges):
        dag.add_edge(a, b)
    structure = StructureFile.from_dag(dag, name=args.name, provenance="miic")
    structure.save(out)
    print(f"wrote {out} ({dag.n_edges} edges, orientation is lexicographic placeholder)")
    for pair in sorted(skeleton.latent_suspects):
        print(f"latent confounder suspected between {pair[0]} and {pair[1]}")
    return 0


def _cmd_elicit(args) -> int:
    cfg = _config(args)
    ctx = PromptContext.load(args.context)
    proposer_spec = _pick(args.proposer, cfg.proposer)
    verifier_spec = _pick(args.verifier, cfg.verifier)
    if proposer_spec is None or verifier_spec is None:
        raise ConfigError("elicit needs --proposer and --verifier (flags or config)")
    proposer = load_transport(proposer_spec)
    verifier = load_transport(verifier_spec)
    data = _load_table(cfg, args.data, args.bins) if (args.data or cfg.data) else None

    transcript = run_protocol(ctx, proposer, verifier, policy=args.policy, data=data)

    out = _out_path(cfg, args.out, "structure_llm.json")
    transcript_path = _out_path(cfg, args.transcript, "transcript.json")
    transcript_structure(transcript, name=args.name).save(out)
    transcript.save(transcript_path)
    print(f"wrote {out} ({transcript.final_dag.n_edges} edges) and {transcript_path}")
    print(f"proposed {transcript.proposed_count}, confirmed {transcript.confirmed_count}")
    return 0


def _cmd_validate(args) -> int:
    cfg = _config(args)
    table = _load_table(cfg, args.data, args.bins)
    dag = StructureFile.load(args.structure).to_dag()
    alpha = _pick(args.alpha, cfg.alpha)
    report = validation.sem_validate(table, dag, alpha=alpha)
    out = _out_path(cfg, args.out, "report.json")
    report.save(out)
    print(report.render_text(), end="")
    print(f"wrote {out}")
    return 0


def _cmd_metrics(args) -> int:
    cfg = _config(args)
    table = _load_table(cfg, args.data, args.bins)
    structure = StructureFile.load(args.structure)
    dag = structure.to_dag()
    smoothing = _pick(args.smoothing, cfg.smoothing)
    bn = fit_cpts(table, dag, smoothing=smoothing,
                  name=structure.name, provenance=structure.provenance)
    entropy = validation.node_entropies(bn)
    arc_mi = validation.arc_mutual_information(table, dag)

    if args.save_model:
        model_path = _out_path(cfg, args.save_model, "model.json")
        bn.save(model_path)
        print(f"wrote {model_path}")

    if args.format == "dot":
        text = to_dot(dag, node_weights=entropy.per_node, edge_weights=arc_mi,
                      graph_name=structure.name)
    elif args.format == "table":
        mi_lines = [f"{p} -> {c}  {v:.4f}" for (p, c), v in sorted(arc_mi.items())]
        text = entropy.render_text() + "\narc mutual information (bits)\n" + \
            "\n".join(mi_lines) + "\n"
    else:
        doc = {
            "entropy": entropy.to_json_dict(),
            "arc_mutual_information": [
                {"parent": p, "child": c, "mi_bits": v}
                for (p, c), v in sorted(arc_mi.items())
            ],
        }
        text = json.dumps(doc, indent=2) + "\n"

    if args.out:
        out = _out_path(cfg, args.out, "metrics.txt")
        out.write_text(text)
        print(f"wrote {out}")
    else:
        print(text, end="")
    return 0


def _cmd_query(args) -> int:
    bn = BayesNet.load(args.model)
    evidence = _parse_evidence(args.evidence)
    if not args.all and not args.target:
        raise ConfigError("query needs --target <node> or --all")

    def render(post) -> list[str]:
        width = max(len(lvl) for lvl in post.levels)
        return [f"  {lvl:<{width}}  {100.0 * p:6.2f}%"
                for lvl, p in zip(post.levels, post.distribution)]

    given = ", ".join(f"{k}={v}" for k, v in evidence.items()) or "no evidence"
    if args.all:
        marginals = all_marginals(bn, evidence)
        for node in bn.nodes:
            print(f"P({node} | {given})")
            print("\n".join(render(marginals[node])))
        return 0
    post = posterior(bn, args.target, evidence)
    print(f"P({args.target} | {given})")
    print("\n".join(render(post)))
    return 0


def _cmd_compare(args) -> int:
    cfg = _config(args)
    if args.reports:
        if args.structures:
            raise ConfigError("give either --reports or --structures, not both")
        sources = args.reports
        reports = [EntropyReport.load(p) for p in sources]
    elif args.structures:
        table = _load_table(cfg, args.data, args.bins)
        reports = []
        sources = args.structures
        for spec_path in sources:
            structure = StructureFile.load(spec_path)
            bn = fit_cpts(table, structure.to_dag(), smoothing=cfg.smoothing,
                          name=structure.name, provenance=structure.provenance)
            reports.append(validation.node_entropies(bn))
    else:
        raise ConfigError("compare needs --reports or --structures")

    labels = args.labels or [Path(p).stem for p in sources]
    if len(labels) != len(reports):
        raise ConfigError("number of labels must match number of reports")
    comparison = compare_methods(list(zip(labels, reports)))
    print(comparison.render_text(), end="")
    if args.out:
        out = _out_path(cfg, args.out, "comparison.json")
        comparison.save(out)
        print(f"wrote {out}")
    return 0


# --- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalbn",
        description="Causal Bayesian-network toolkit: discovery, elicitation, "
                    "validation, inference.",
    )
    parser.add_argument("--config", help="pipeline config JSON", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean and discretize a CSV")
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_preprocess)

    p = sub.add_parser("learn", help="learn a structure from data")
    p.add_argument("--method", choices=["bic", "miic"], default="bic")
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--name", default="learned")
    p.add_argument("--smoothing", type=float, default=None)
    p.add_argument("--mi-threshold", type=float, default=None, dest="mi_threshold")
    p.add_argument("--max-cond", type=int, default=None, dest="max_cond")
    p.add_argument("--max-iters", type=int, default=100, dest="max_iters")
    p.set_defaults(fn=_cmd_learn)

    p = sub.add_parser("elicit", help="run the two-round LLM protocol")
    p.add_argument("--context", required=True)
    p.add_argument("--proposer", default=None, help="transport config path or mock:<file>")
    p.add_argument("--verifier", default=None, help="transport config path or mock:<file>")
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--transcript", default=None)
    p.add_argument("--name", default="llm_structure")
    p.add_argument("--policy", choices=["verifier_priority", "sem_estimate", "manual"],
                   default="verifier_priority")
    p.set_defaults(fn=_cmd_elicit)

    p = sub.add_parser("validate", help="per-edge regression report")
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--structure", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("metrics", help="entropy and arc MI for a structure")
    p.add_argument("--structure", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--format", choices=["json", "table", "dot"], default="json")
    p.add_argument("--smoothing", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--save-model", default=None, dest="save_model",
                   help="also write the fitted model JSON here")
    p.set_defaults(fn=_cmd_metrics)

    p = sub.add_parser("query", help="posterior from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence", default=None, help="comma-separated name=level")
    p.add_argument("--target", default=None)
    p.add_argument("--all", action="store_true")
    p.set_defaults(fn=_cmd_query)

    p = sub.add_parser("compare", help="entropy summaries across methods")
    p.add_argument("--reports", nargs="+", default=None)
    p.add_argument("--structures", nargs="+", default=None)
    p.add_argument("--labels", nargs="+", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--bins", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CausalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
