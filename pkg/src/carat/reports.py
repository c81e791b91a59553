"""Tabular exports, scenario overrides, and result persistence."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

from .attribution import AttributeSolution, slack_report
from .graph import (
    InletAttributeTable,
    InletRow,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
    inlet_nodes,
)
from .io import graph_to_records, inlets_to_records, write_records

BETA_COLUMNS = ["node_type", "c", "b", "g", "p", "smiles", "element", "attribute", "share"]
SLACK_COLUMNS = ["node_type", "c", "b", "g", "p", "smiles", "element", "z", "q", "magnitude"]
COMPARISON_COLUMNS = [
    "node_type", "c", "b", "g", "p", "smiles", "element", "attribute",
    "base", "scenario", "delta",
]


def _beta_rows(solution: AttributeSolution) -> list[dict]:
    rows = []
    for (node, material, smiles, element, attribute), value in sorted(
        solution.production_beta.items(), key=lambda kv: (str(kv[0][0]),) + kv[0][1:]
    ):
        rows.append(
            {
                "node_type": "production",
                "c": node.company,
                "b": node.process,
                "g": node.main_product,
                "p": material,
                "smiles": smiles,
                "element": element,
                "attribute": attribute,
                "share": repr(value),
            }
        )
    mix_all = dict(solution.inlet_beta)
    mix_all.update(solution.mix_beta)
    for (node, smiles, element, attribute), value in sorted(
        mix_all.items(), key=lambda kv: (str(kv[0][0]),) + kv[0][1:]
    ):
        rows.append(
            {
                "node_type": "mix",
                "c": node.company,
                "b": "",
                "g": "",
                "p": node.product,
                "smiles": smiles,
                "element": element,
                "attribute": attribute,
                "share": repr(value),
            }
        )
    return rows


def write_beta_csv(path: str | Path, solution: AttributeSolution) -> None:
    write_records(path, _beta_rows(solution), BETA_COLUMNS)


def write_slack_csv(path: str | Path, solution: AttributeSolution) -> None:
    rows = []
    for node, material, smiles, element, z, q, magnitude in slack_report(solution):
        if isinstance(node, ProductionNodeId):
            rows.append(
                {
                    "node_type": "production",
                    "c": node.company,
                    "b": node.process,
                    "g": node.main_product,
                    "p": material,
                    "smiles": smiles,
                    "element": element,
                    "z": repr(z),
                    "q": repr(q),
                    "magnitude": repr(magnitude),
                }
            )
        else:
            rows.append(
                {
                    "node_type": "mix",
                    "c": node.company,
                    "b": "",
                    "g": "",
                    "p": material,
                    "smiles": smiles,
                    "element": element,
                    "z": repr(z),
                    "q": repr(q),
                    "magnitude": repr(magnitude),
                }
            )
    write_records(path, rows, SLACK_COLUMNS)


def write_comparison_csv(
    path: str | Path, base: AttributeSolution, scenario: AttributeSolution
) -> None:
    base_rows = {tuple(r[k] for k in BETA_COLUMNS[:-1]): float(r["share"]) for r in _beta_rows(base)}
    scen_rows = {tuple(r[k] for k in BETA_COLUMNS[:-1]): float(r["share"]) for r in _beta_rows(scenario)}
    rows = []
    for key in sorted(set(base_rows) | set(scen_rows)):
        b = base_rows.get(key)
        s = scen_rows.get(key)
        record = dict(zip(BETA_COLUMNS[:-1], key))
        record["base"] = "" if b is None else repr(b)
        record["scenario"] = "" if s is None else repr(s)
        record["delta"] = "" if b is None or s is None else repr(s - b)
        rows.append(record)
    write_records(path, rows, COMPARISON_COLUMNS)


def scenario_override(
    graph: ValueChainGraph,
    inlets: InletAttributeTable,
    overrides: Sequence[tuple[MixNodeId, str, str, float]],
) -> InletAttributeTable:
    """Fresh inlet table with (mix, smiles, attribute, share) overrides applied.

    The remaining attributes of each overridden (mix, substance, element)
    share the leftover proportionally to their previous values, so the slot
    still sums to one. Only inlet mix nodes may be targeted.
    """
    valid = inlet_nodes(graph)
    for mix, smiles, attribute, share in overrides:
        if mix not in valid:
            raise ValueError(f"override targets {mix}, which is not an inlet mix node")
        if not 0 <= share <= 1:
            raise ValueError(f"override share must be in [0, 1], got {share!r}")

    wanted: dict[tuple[MixNodeId, str], dict[str, float]] = {}
    for mix, smiles, attribute, share in overrides:
        wanted.setdefault((mix, smiles), {})[attribute] = share

    # Group existing rows per (mix, smiles, element).
    groups: dict[tuple[MixNodeId, str, str], dict[str, float]] = {}
    order: list[tuple[MixNodeId, str, str]] = []
    for row in inlets:
        key = (row.mix, row.smiles, row.element)
        if key not in groups:
            groups[key] = {}
            order.append(key)
        groups[key][row.attribute] = row.share

    rows: list[InletRow] = []
    for key in order:
        mix, smiles, element = key
        shares = dict(groups[key])
        pins = wanted.get((mix, smiles), {})
        if pins:
            pinned_total = sum(pins.values())
            if pinned_total > 1 + 1e-9:
                raise ValueError(f"{mix} {smiles}: override shares exceed 1")
            free = [a for a in shares if a not in pins]
            old_free = sum(shares[a] for a in free)
            for attribute, share in pins.items():
                shares[attribute] = share
            leftover = 1.0 - pinned_total
            for attribute in free:
                if old_free > 1e-12:
                    shares[attribute] = shares[attribute] / old_free * leftover
                else:
                    shares[attribute] = leftover / len(free) if free else 0.0
        for attribute, share in shares.items():
            rows.append(InletRow(mix, smiles, element, attribute, share))
    return InletAttributeTable(rows)


def product_bcc(
    graph: ValueChainGraph,
    solution: AttributeSolution,
    *,
    attribute: str = "biogenic",
    element: str = "C",
) -> dict[MixNodeId, float]:
    """Carbon-weighted attribute share of every terminal mix node's material."""
    from .smiles import molar_mass, parse_molecule

    fed = {dst for (_src, dst) in graph.mu_edges}
    consumed = {src for (src, _dst) in graph.alpha_edges}
    terminals = sorted(d for d in graph.mix_nodes if d in fed and d not in consumed)

    out: dict[MixNodeId, float] = {}
    for mix in terminals:
        weights: dict[str, float] = {}
        for (src, dst), mu in graph.mu_edges.items():
            if dst != mix or src not in graph.production_nodes:
                continue
            bill = graph.production_nodes[src]
            for smiles in bill.substances("product", mix.product):
                weights[smiles] = weights.get(smiles, 0.0) + mu * bill.lam(
                    "product", mix.product, smiles
                )
        total = 0.0
        weighted = 0.0
        for smiles, w in weights.items():
            mol = parse_molecule(smiles)
            carbon = mol.element_counts.get(element, 0)
            if carbon == 0:
                continue
            carbon_mass = w * carbon * 12.011 / molar_mass(mol)
            key = (mix, smiles, element, attribute)
            share = solution.mix_beta.get(key, solution.inlet_beta.get(key))
            if share is None:
                continue
            total += carbon_mass
            weighted += carbon_mass * share
        if total > 0:
            out[mix] = weighted / total
    return out


def write_results(
    path: str | Path,
    graph: ValueChainGraph,
    inlets: InletAttributeTable,
    solution: AttributeSolution,
) -> None:
    """Single-document persistence of inputs and the solved shares."""
    tables = graph_to_records(graph)
    tables["inlet"] = inlets_to_records(inlets)
    doc = {
        "tables": tables,
        "solution": {
            "status": solution.status,
            "total_slack": solution.total_slack,
            "max_residual": solution.max_residual,
            "iterations": solution.iterations,
            "attributes": list(solution.attributes),
            "elements": list(solution.elements),
            "beta": _beta_rows(solution),
            "production_slack": [
                {
                    "c": node.company,
                    "b": node.process,
                    "g": node.main_product,
                    "p": material,
                    "smiles": smiles,
                    "element": element,
                    "z": z,
                    "q": q,
                }
                for (node, material, smiles, element), (z, q) in sorted(
                    solution.production_slack.items(), key=lambda kv: str(kv[0])
                )
            ],
            "mix_slack": [
                {
                    "c": mix.company,
                    "p": mix.product,
                    "smiles": smiles,
                    "element": element,
                    "z": z,
                    "q": q,
                }
                for (mix, smiles, element), (z, q) in sorted(
                    solution.mix_slack.items(), key=lambda kv: str(kv[0])
                )
            ],
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")


def load_results(path: str | Path):
    """Rebuild (graph, inlets, solution) from a results document."""
    from .graph import load_graph, load_inlets

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    tables = doc["tables"]
    graph = load_graph(tables["bom"], tables["bos"], tables["mix"])
    inlets = load_inlets(tables.get("inlet", []))
    sol = doc["solution"]

    production_beta: dict[tuple, float] = {}
    mix_beta: dict[tuple, float] = {}
    inlet_beta: dict[tuple, float] = {}
    inlet_set = inlet_nodes(graph)
    for row in sol["beta"]:
        share = float(row["share"])
        if row["node_type"] == "production":
            node = ProductionNodeId(row["c"], row["b"], row["g"])
            production_beta[(node, row["p"], row["smiles"], row["element"], row["attribute"])] = share
        else:
            mix = MixNodeId(row["c"], row["p"])
            key = (mix, row["smiles"], row["element"], row["attribute"])
            if mix in inlet_set:
                inlet_beta[key] = share
            else:
                mix_beta[key] = share
    production_slack = {
        (ProductionNodeId(r["c"], r["b"], r["g"]), r["p"], r["smiles"], r["element"]): (
            float(r["z"]),
            float(r["q"]),
        )
        for r in sol.get("production_slack", [])
    }
    mix_slack = {
        (MixNodeId(r["c"], r["p"]), r["smiles"], r["element"]): (float(r["z"]), float(r["q"]))
        for r in sol.get("mix_slack", [])
    }
    solution = AttributeSolution(
        status=sol["status"],
        total_slack=float(sol["total_slack"]),
        production_beta=production_beta,
        mix_beta=mix_beta,
        inlet_beta=inlet_beta,
        production_slack=production_slack,
        mix_slack=mix_slack,
        max_residual=float(sol.get("max_residual", 0.0)),
        iterations=int(sol.get("iterations", 0)),
        attributes=tuple(sol["attributes"]),
        elements=tuple(sol["elements"]),
    )
    return graph, inlets, solution
