"""Command-line entry point: validate, map, trace, scenario, report.

Configuration precedence is flags > environment (CARAT_*) > config file >
defaults. Exit codes: 0 success, 1 domain/diagnostic failure, 2 I/O or
configuration failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .atombill import boa_records
from .diagnostics import errors as error_diagnostics
from .estimator import AttributeTracer, derive_atom_bills
from .graph import GraphLoadError, MixNodeId, ValueChainGraph, InletAttributeTable, validate
from .io import load_bundle, load_tables, write_records
from .mapping import CachedMappingProvider, MappingError, provider_from_spec
from .reports import (
    load_results,
    product_bcc,
    scenario_override,
    write_beta_csv,
    write_comparison_csv,
    write_results,
    write_slack_csv,
)
from .sankey import emit_sankey, write_sankey

SLACK_GATE = 1e-6

CONFIG_KEYS = (
    "bom",
    "bos",
    "mix",
    "inlet",
    "bundle",
    "elements",
    "attributes",
    "threshold",
    "mapper",
    "out",
)


@dataclass
class RunConfig:
    bom: Optional[str] = None
    bos: Optional[str] = None
    mix: Optional[str] = None
    inlet: Optional[str] = None
    bundle: Optional[str] = None
    elements: tuple[str, ...] = ("C",)
    attributes: tuple[str, ...] = ("fossil", "biogenic")
    threshold: float = 0.01
    mapper: Optional[str] = None
    out: str = "out"
    overrides: list[tuple[str, str, str, str, float]] = field(default_factory=list)
    name: str = "scenario"


def _split_list(value) -> tuple[str, ...]:
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return tuple(part.strip() for part in str(value).split(",") if part.strip())


def resolve_config(args: argparse.Namespace) -> RunConfig:
    merged: dict = {}
    config_path = getattr(args, "config", None) or os.environ.get("CARAT_CONFIG")
    if config_path:
        try:
            merged.update(json.loads(Path(config_path).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
    for key in CONFIG_KEYS:
        env = os.environ.get(f"CARAT_{key.upper()}")
        if env is not None:
            merged[key] = env
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value

    config = RunConfig()
    for key, value in merged.items():
        if key in ("elements", "attributes"):
            setattr(config, key, _split_list(value))
        elif key == "threshold":
            config.threshold = float(value)
        elif key in CONFIG_KEYS:
            setattr(config, key, value)
    config.overrides = [_parse_override(o) for o in (getattr(args, "override", None) or [])]
    if getattr(args, "name", None):
        config.name = args.name
    return config


class ConfigError(ValueError):
    pass


def _parse_override(text: str) -> tuple[str, str, str, str, float]:
    parts = text.split(",")
    if len(parts) != 5:
        raise ConfigError(
            f"override must be company,product,smiles,attribute,share — got {text!r}"
        )
    c, p, smiles, attribute, share = (part.strip() for part in parts)
    try:
        return c, p, smiles, attribute, float(share)
    except ValueError:
        raise ConfigError(f"override share is not a number: {share!r}")


def _load_chain(config: RunConfig) -> tuple[ValueChainGraph, InletAttributeTable, Path]:
    if config.bundle:
        graph, inlets = load_bundle(config.bundle)
        return graph, inlets, Path(config.bundle).parent
    if not (config.bom and config.bos and config.mix):
        raise ConfigError("either --bundle or all of --bom/--bos/--mix are required")
    graph, inlets = load_tables(config.bom, config.bos, config.mix, config.inlet)
    return graph, inlets, Path(config.bom).parent


def _build_mapper(config: RunConfig, input_dir: Path):
    cache_path = input_dir / "mapcache.csv"
    if config.mapper:
        return provider_from_spec(config.mapper, cache_path=cache_path)
    if cache_path.exists():
        return CachedMappingProvider(None, cache_path)
    raise ConfigError(
        "no --mapper configured and no mapcache.csv next to the inputs; "
        "use --mapper file:<path> or --mapper http:<url>"
    )


def _print_diagnostics(diags) -> None:
    for d in diags:
        print(str(d))


def cmd_validate(config: RunConfig) -> int:
    graph, inlets, _ = _load_chain(config)
    diags = list(validate(graph)) + list(inlets.validate())
    _print_diagnostics(diags)
    bad = error_diagnostics(diags)
    print(f"validate: {len(bad)} error(s), {len(diags) - len(bad)} warning(s)")
    return 1 if bad else 0


def cmd_map(config: RunConfig) -> int:
    graph, _inlets, input_dir = _load_chain(config)
    mapper = _build_mapper(config, input_dir)
    psi, plans = derive_atom_bills(
        graph, mapper, elements=config.elements, token_limit=512
    )
    out = Path(config.out)
    rows = []
    for node in sorted(psi):
        base = {
            "node_c": node.company,
            "node_b": node.process,
            "node_g": node.main_product,
        }
        for record in boa_records(psi[node]):
            rows.append({**base, **record})
    write_records(
        out / "boa.csv",
        rows,
        [
            "node_c",
            "node_b",
            "node_g",
            "reactant_material",
            "reactant_smiles",
            "product_material",
            "product_smiles",
            "element",
            "atom_count",
            "atom_share",
        ],
    )
    total = sum(len(p) for p in plans.values())
    print(f"map: {total} reactions across {len(plans)} nodes; bills in {out / 'boa.csv'}")
    return 0


def _run_trace(
    config: RunConfig,
    graph: ValueChainGraph,
    inlets: InletAttributeTable,
    input_dir: Path,
    out: Path,
):
    mapper = _build_mapper(config, input_dir)
    tracer = AttributeTracer(
        elements=config.elements,
        attributes=config.attributes,
        mapper=mapper,
        trace_threshold=config.threshold,
    )
    tracer.fit(graph, inlets)
    solution = tracer.solution_

    out.mkdir(parents=True, exist_ok=True)
    write_beta_csv(out / "beta.csv", solution)
    write_slack_csv(out / "slack.csv", solution)
    rows = []
    for node in sorted(tracer.psi_):
        base = {
            "node_c": node.company,
            "node_b": node.process,
            "node_g": node.main_product,
        }
        for record in boa_records(tracer.psi_[node]):
            rows.append({**base, **record})
    write_records(
        out / "boa.csv",
        rows,
        [
            "node_c",
            "node_b",
            "node_g",
            "reactant_material",
            "reactant_smiles",
            "product_material",
            "product_smiles",
            "element",
            "atom_count",
            "atom_share",
        ],
    )
    document = emit_sankey(tracer.graph_, solution)
    write_sankey(document, out / "sankey.json", out / "sankey.html")
    (out / "lp.txt").write_text(tracer.lp_.dump() + "\n", encoding="utf-8")
    write_results(out / "results.json", tracer.graph_, inlets, solution)

    for mix, value in sorted(tracer.predict_products().items(), key=lambda kv: str(kv[0])):
        print(f"BCC({mix.product}) = {100 * value:.1f}%")
    print(f"total slack = {solution.total_slack:.3e} ({solution.status})")
    return tracer


def cmd_trace(config: RunConfig) -> int:
    graph, inlets, input_dir = _load_chain(config)
    bad = error_diagnostics(validate(graph))
    if bad:
        _print_diagnostics(bad)
        return 1
    tracer = _run_trace(config, graph, inlets, input_dir, Path(config.out))
    return 0 if tracer.total_slack_ < SLACK_GATE and tracer.status_ == "optimal" else 1


def cmd_scenario(config: RunConfig) -> int:
    graph, inlets, input_dir = _load_chain(config)
    bad = error_diagnostics(validate(graph))
    if bad:
        _print_diagnostics(bad)
        return 1
    overrides = [
        (MixNodeId(c, p), smiles, attribute, share)
        for c, p, smiles, attribute, share in config.overrides
    ]
    adjusted = scenario_override(graph, inlets, overrides)

    out = Path(config.out)
    base_tracer = _run_trace(config, graph, inlets, input_dir, out)
    scenario_out = out / f"scenario-{config.name}"
    scen_tracer = _run_trace(config, graph, adjusted, input_dir, scenario_out)
    write_comparison_csv(
        scenario_out / "comparison.csv", base_tracer.solution_, scen_tracer.solution_
    )
    ok = scen_tracer.total_slack_ < SLACK_GATE and scen_tracer.status_ == "optimal"
    return 0 if ok else 1


def cmd_report(config: RunConfig, results_path: str) -> int:
    graph, inlets, solution = load_results(results_path)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_beta_csv(out / "beta.csv", solution)
    write_slack_csv(out / "slack.csv", solution)
    document = emit_sankey(graph, solution)
    write_sankey(document, out / "sankey.json", out / "sankey.html")
    for mix, value in sorted(
        product_bcc(graph, solution, attribute=solution.attributes[-1]).items(),
        key=lambda kv: str(kv[0]),
    ):
        print(f"BCC({mix.product}) = {100 * value:.1f}%")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carat",
        description="Trace elemental attribute shares (e.g. biogenic carbon) "
        "through a chemical value chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--bom", help="bill-of-materials CSV")
        p.add_argument("--bos", help="bill-of-substances CSV")
        p.add_argument("--mix", help="consumption-mix CSV")
        p.add_argument("--inlet", help="inlet attribute CSV")
        p.add_argument("--bundle", help="single JSON bundle with all four tables")
        p.add_argument("--elements", help="comma-separated tracked elements (default C)")
        p.add_argument("--attributes", help="comma-separated attributes (default fossil,biogenic)")
        p.add_argument("--threshold", type=float, help="trace mass-fraction threshold (default 0.01)")
        p.add_argument("--mapper", help="atom mapper: file:<csv> or http:<url>")
        p.add_argument("--out", help="output directory (default ./out)")
        p.add_argument("--config", help="JSON config file")

    add_common(sub.add_parser("validate", help="check the value-chain tables"))
    add_common(sub.add_parser("map", help="construct and map reactions, write boa.csv"))
    add_common(sub.add_parser("trace", help="full pipeline: bills, LP, reports"))

    scenario = sub.add_parser("scenario", help="trace with inlet overrides and compare")
    add_common(scenario)
    scenario.add_argument(
        "--override",
        action="append",
        metavar="c,p,smiles,attribute,share",
        help="inlet override, repeatable",
    )
    scenario.add_argument("--name", help="scenario name (output subdirectory suffix)")

    report = sub.add_parser("report", help="re-render reports from results.json")
    add_common(report)
    report.add_argument("--results", required=True, help="results.json from a trace run")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command == "validate":
            return cmd_validate(config)
        if args.command == "map":
            return cmd_map(config)
        if args.command == "trace":
            return cmd_trace(config)
        if args.command == "scenario":
            return cmd_scenario(config)
        if args.command == "report":
            return cmd_report(config, args.results)
        parser.error(f"unknown command {args.command}")
    except (ConfigError, FileNotFoundError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GraphLoadError, MappingError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
