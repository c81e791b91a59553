"""Sankey documents: one link per (edge, substance), colored by attribute share.

Carbon links interpolate linearly in RGB from gray (share 0) to dark green
(share 1); non-carbon streams are pale yellow. Output is renderer-agnostic
JSON plus an optional self-contained HTML page.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .attribution import AttributeSolution
from .diagnostics import Diagnostic
from .graph import MixNodeId, ValueChainGraph

GRAY = "#9e9e9e"
DARK_GREEN = "#1b5e20"
YELLOW = "#fff3c4"
MIX_NODE_COLOR = "#1f4e79"
PRODUCTION_NODE_COLOR = "#74a9d8"


def interpolate_color(share: float, low: str = GRAY, high: str = DARK_GREEN) -> str:
    share = min(max(share, 0.0), 1.0)
    channels = []
    for i in (1, 3, 5):
        a = int(low[i : i + 2], 16)
        b = int(high[i : i + 2], 16)
        channels.append(round(a + share * (b - a)))
    return "#" + "".join(f"{c:02x}" for c in channels)


@dataclass
class SankeyDocument:
    nodes: list[dict]
    links: list[dict]
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False)

    def to_json(self) -> str:
        return json.dumps({"nodes": self.nodes, "links": self.links}, indent=1)


def _topological_order(graph: ValueChainGraph) -> Optional[list]:
    nodes = sorted(graph.mix_nodes, key=str) + sorted(graph.production_nodes, key=str)
    outgoing: dict = {node: [] for node in nodes}
    indegree = {node: 0 for node in nodes}
    for edges in (graph.alpha_edges, graph.mu_edges):
        for (src, dst) in edges:
            if src in outgoing and dst in indegree:
                outgoing[src].append(dst)
                indegree[dst] += 1
    ready = sorted((n for n, d in indegree.items() if d == 0), key=str)
    order = []
    while ready:
        node = ready.pop(0)
        order.append(node)
        inserts = []
        for nxt in outgoing[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                inserts.append(nxt)
        if inserts:
            ready = sorted(ready + inserts, key=str)
    if len(order) != len(nodes):
        return None  # cyclic
    return order


def _beta_lookup(
    solution: AttributeSolution, attribute: str
) -> tuple[dict, dict]:
    mix_like = dict(solution.inlet_beta)
    mix_like.update(solution.mix_beta)
    mix = {
        (node, smiles, element): value
        for (node, smiles, element, attr), value in mix_like.items()
        if attr == attribute
    }
    prod = {
        (node, material, smiles, element): value
        for (node, material, smiles, element, attr), value in solution.production_beta.items()
        if attr == attribute
    }
    return mix, prod


def emit_sankey(
    graph: ValueChainGraph,
    solution: AttributeSolution,
    *,
    color_attribute: str = "biogenic",
    color_element: str = "C",
) -> SankeyDocument:
    """Deterministic node/link document for any Sankey renderer."""
    from .smiles import parse_molecule

    order = _topological_order(graph)
    if order is None:
        order = sorted(graph.mix_nodes, key=str) + sorted(graph.production_nodes, key=str)

    diagnostics: list[Diagnostic] = []
    nodes = []
    for node in order:
        is_mix = isinstance(node, MixNodeId)
        nodes.append(
            {
                "id": str(node),
                "label": node.product if is_mix else node.main_product,
                "kind": "mix" if is_mix else "production",
                "color": MIX_NODE_COLOR if is_mix else PRODUCTION_NODE_COLOR,
            }
        )

    mix_beta, prod_beta = _beta_lookup(solution, color_attribute)
    counts_cache: dict[str, int] = {}

    def carbon_count(smiles: str) -> int:
        if smiles not in counts_cache:
            counts_cache[smiles] = parse_molecule(smiles).element_counts.get(color_element, 0)
        return counts_cache[smiles]

    def link_color(smiles: str, share: Optional[float], where: str) -> str:
        if carbon_count(smiles) == 0:
            return YELLOW
        if share is None:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "missing-share",
                    f"{where}: no {color_attribute} share for {smiles}; shown gray",
                )
            )
            return GRAY
        return interpolate_color(share)

    links = []
    # Alpha edges: mix -> production, one link per substance the consumer draws.
    for (src, dst) in sorted(graph.alpha_edges, key=lambda e: (str(e[0]), str(e[1]))):
        alpha = graph.alpha_edges[(src, dst)]
        bill = graph.production_nodes.get(dst)
        substances = bill.substances("reactant", src.product) if bill else []
        if not substances:
            links.append(
                {
                    "source": str(src),
                    "target": str(dst),
                    "substance": "",
                    "width": alpha,
                    "color": GRAY,
                }
            )
            continue
        for smiles in substances:
            share = mix_beta.get((src, smiles, color_element))
            links.append(
                {
                    "source": str(src),
                    "target": str(dst),
                    "substance": smiles,
                    "width": alpha * bill.lam("reactant", src.product, smiles),
                    "color": link_color(smiles, share, f"{src} -> {dst}"),
                }
            )
    # Mu edges: production -> mix, one link per substance the producer delivers.
    for (src, dst) in sorted(graph.mu_edges, key=lambda e: (str(e[0]), str(e[1]))):
        mu = graph.mu_edges[(src, dst)]
        bill = graph.production_nodes.get(src)
        substances = bill.substances("product", dst.product) if bill else []
        if not substances:
            links.append(
                {
                    "source": str(src),
                    "target": str(dst),
                    "substance": "",
                    "width": mu,
                    "color": GRAY,
                }
            )
            continue
        for smiles in substances:
            share = prod_beta.get((src, dst.product, smiles, color_element))
            links.append(
                {
                    "source": str(src),
                    "target": str(dst),
                    "substance": smiles,
                    "width": mu * bill.lam("product", dst.product, smiles),
                    "color": link_color(smiles, share, f"{src} -> {dst}"),
                }
            )

    return SankeyDocument(nodes=nodes, links=links, diagnostics=tuple(diagnostics))


_HTML_TEMPLATE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Value chain attribute flows</title>
<style>
 body { font-family: sans-serif; margin: 16px; background: #fafafa; }
 svg { background: white; border: 1px solid #ddd; }
 text { font-size: 11px; fill: #222; }
</style>
</head>
<body>
<h2>Value chain attribute flows</h2>
<svg id="sankey" width="1200" height="700"></svg>
<script id="data" type="application/json">__DATA__</script>
<script>
const doc = JSON.parse(document.getElementById("data").textContent);
const svg = document.getElementById("sankey");
const W = 1200, H = 700, PAD = 60;

// Assign columns by longest-path depth along the links.
const index = {};
doc.nodes.forEach((n, i) => index[n.id] = i);
const depth = doc.nodes.map(() => 0);
for (let pass = 0; pass < doc.nodes.length; pass++) {
  let changed = false;
  for (const link of doc.links) {
    const s = index[link.source], t = index[link.target];
    if (depth[t] < depth[s] + 1 && depth[s] < doc.nodes.length) {
      depth[t] = depth[s] + 1; changed = true;
    }
  }
  if (!changed) break;
}
const maxDepth = Math.max(...depth, 1);
const columns = {};
doc.nodes.forEach((n, i) => {
  (columns[depth[i]] = columns[depth[i]] || []).push(i);
});
const pos = {};
for (const [d, ids] of Object.entries(columns)) {
  const x = PAD + (W - 2 * PAD) * (d / maxDepth);
  ids.forEach((i, k) => {
    const y = PAD + (H - 2 * PAD) * (k + 0.5) / ids.length;
    pos[doc.nodes[i].id] = {x, y};
  });
}
function path(a, b) {
  const mx = (a.x + b.x) / 2;
  return `M ${a.x} ${a.y} C ${mx} ${a.y}, ${mx} ${b.y}, ${b.x} ${b.y}`;
}
const ns = "http://www.w3.org/2000/svg";
for (const link of doc.links) {
  const p = document.createElementNS(ns, "path");
  p.setAttribute("d", path(pos[link.source], pos[link.target]));
  p.setAttribute("stroke", link.color);
  p.setAttribute("stroke-width", Math.max(1.5, 14 * link.width));
  p.setAttribute("fill", "none");
  p.setAttribute("opacity", "0.75");
  const title = document.createElementNS(ns, "title");
  title.textContent = `${link.source} -> ${link.target}: ${link.substance}`;
  p.appendChild(title);
  svg.appendChild(p);
}
for (const node of doc.nodes) {
  const {x, y} = pos[node.id];
  const r = document.createElementNS(ns, "rect");
  r.setAttribute("x", x - 5); r.setAttribute("y", y - 14);
  r.setAttribute("width", 10); r.setAttribute("height", 28);
  r.setAttribute("fill", node.color);
  svg.appendChild(r);
  const t = document.createElementNS(ns, "text");
  t.setAttribute("x", x + 8); t.setAttribute("y", y + 4);
  t.textContent = node.label;
  svg.appendChild(t);
}
</script>
</body>
</html>
"""


def write_sankey(document: SankeyDocument, json_path: str | Path, html_path: Optional[str | Path] = None) -> None:
    json_path = Path(json_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(document.to_json(), encoding="utf-8")
    if html_path is not None:
        html = _HTML_TEMPLATE.replace("__DATA__", document.to_json())
        Path(html_path).write_text(html, encoding="utf-8")
