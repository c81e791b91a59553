"""File ingestion and persistence for the four input tables and the bundle.

CSV schemas (UTF-8, header row, '.' decimal):
  bom.csv:   node_c,node_b,node_g,role,material,ratio
  bos.csv:   node_c,node_b,node_g,role,material,smiles,ratio
  mix.csv:   mix_c,mix_p,src_c,src_b,src_g,mu
  inlet.csv: mix_c,mix_p,smiles,element,attribute,share

The bundle JSON carries the same four tables under keys bom/bos/mix/inlet.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .graph import (
    BillRow,
    GraphLoadError,
    InletAttributeTable,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
    load_graph,
    load_inlets,
)

BUNDLE_KEYS = ("bom", "bos", "mix", "inlet")


def _fmt(x: float) -> str:
    return repr(float(x))


def read_records(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="", encoding="utf-8") as handle:
        return [dict(row) for row in csv.DictReader(handle)]


def write_records(path: str | Path, records: Iterable[Mapping], columns: list[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=columns)
        writer.writeheader()
        for rec in records:
            writer.writerow({k: rec.get(k, "") for k in columns})


def load_tables(
    bom: str | Path,
    bos: str | Path,
    mix: str | Path,
    inlet: Optional[str | Path] = None,
    **load_kwargs,
) -> tuple[ValueChainGraph, InletAttributeTable]:
    graph = load_graph(
        read_records(bom), read_records(bos), read_records(mix), **load_kwargs
    )
    inlets = load_inlets(read_records(inlet)) if inlet else InletAttributeTable([])
    return graph, inlets


def load_bundle(path: str | Path, **load_kwargs) -> tuple[ValueChainGraph, InletAttributeTable]:
    with Path(path).open(encoding="utf-8") as handle:
        doc = json.load(handle)
    missing = [k for k in ("bom", "bos", "mix") if k not in doc]
    if missing:
        raise GraphLoadError(f"bundle is missing tables: {missing}")
    graph = load_graph(doc["bom"], doc["bos"], doc["mix"], **load_kwargs)
    inlets = load_inlets(doc.get("inlet", []))
    return graph, inlets


def graph_to_records(graph: ValueChainGraph) -> dict[str, list[dict]]:
    """Invert load_graph back into bom/bos/mix record lists."""
    bom: list[dict] = []
    bos: list[dict] = []
    for node in sorted(graph.production_nodes):
        bill = graph.production_nodes[node]
        base = {"node_c": node.company, "node_b": node.process, "node_g": node.main_product}
        for (role, material), ratio in sorted(bill.material_ratios.items()):
            bom.append({**base, "role": role, "material": material, "ratio": _fmt(ratio)})
        for row in bill.rows:
            bos.append(
                {
                    **base,
                    "role": row.role,
                    "material": row.material,
                    "smiles": row.smiles,
                    "ratio": _fmt(row.ratio),
                }
            )
    mix: list[dict] = []
    for (src, dst), mu in sorted(graph.mu_edges.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        mix.append(
            {
                "mix_c": dst.company,
                "mix_p": dst.product,
                "src_c": src.company,
                "src_b": src.process,
                "src_g": src.main_product,
                "mu": _fmt(mu),
            }
        )
    return {"bom": bom, "bos": bos, "mix": mix}


def inlets_to_records(inlets: InletAttributeTable) -> list[dict]:
    return [
        {
            "mix_c": row.mix.company,
            "mix_p": row.mix.product,
            "smiles": row.smiles,
            "element": row.element,
            "attribute": row.attribute,
            "share": _fmt(row.share),
        }
        for row in inlets
    ]


def write_bundle(path: str | Path, graph: ValueChainGraph, inlets: InletAttributeTable) -> None:
    doc = graph_to_records(graph)
    doc["inlet"] = inlets_to_records(inlets)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="utf-8")
