"""Bipartite value-chain graph: mix/production nodes, bills, consumption mixes.

Mix nodes are virtual tanks indexed (company, product); production nodes are
indexed (company, business process, main product). Alpha edges carry kg of
input material per kg of main output; mu edges carry consumption-mix shares.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .diagnostics import Diagnostic
from .smiles import SmilesError, parse_molecule

log = logging.getLogger(__name__)

ROLES = ("reactant", "product")

MU_SUM_TOLERANCE = 1e-9
MU_NORMALIZE_WINDOW = 1e-3
LAMBDA_SUM_TOLERANCE = 1e-6
DEFAULT_TRACE_THRESHOLD = 0.01


class GraphLoadError(ValueError):
    """Structurally unusable input records (schema violation, dangling reference)."""


@dataclass(frozen=True, order=True)
class MixNodeId:
    company: str
    product: str

    def __str__(self) -> str:
        return f"d:{self.company}|{self.product}"


@dataclass(frozen=True, order=True)
class ProductionNodeId:
    company: str
    process: str
    main_product: str

    def __str__(self) -> str:
        return f"t:{self.company}|{self.process}|{self.main_product}"


@dataclass(frozen=True)
class BillRow:
    role: str
    material: str
    smiles: str
    ratio: float


@dataclass(frozen=True)
class BillOfSubstances:
    """Substance-level recipe of one production node.

    material_ratios holds the material-level kg-per-kg-main-output numbers
    (input ratios for reactants, output ratios for products); rows break each
    material into substances. lambdas are mass fractions normalized within
    each (role, material).
    """

    node: ProductionNodeId
    material_ratios: dict[tuple[str, str], float]
    rows: tuple[BillRow, ...]
    lambdas: dict[tuple[str, str, str], float] = field(compare=False, default_factory=dict)

    @staticmethod
    def build(
        node: ProductionNodeId,
        material_ratios: Mapping[tuple[str, str], float],
        rows: Sequence[BillRow],
    ) -> "BillOfSubstances":
        lambdas = _normalized_lambdas(rows)
        return BillOfSubstances(
            node=node,
            material_ratios=dict(material_ratios),
            rows=tuple(rows),
            lambdas=lambdas,
        )

    def materials(self, role: str) -> list[str]:
        seen: list[str] = []
        for (r, material) in self.material_ratios:
            if r == role and material not in seen:
                seen.append(material)
        return seen

    def substances(self, role: str, material: Optional[str] = None) -> list[str]:
        seen: list[str] = []
        for row in self.rows:
            if row.role != role:
                continue
            if material is not None and row.material != material:
                continue
            if row.smiles not in seen:
                seen.append(row.smiles)
        return seen

    def ratio(self, role: str, material: str) -> float:
        return self.material_ratios.get((role, material), 0.0)

    def lam(self, role: str, material: str, smiles: str) -> float:
        return self.lambdas.get((role, material, smiles), 0.0)


def _normalized_lambdas(rows: Sequence[BillRow]) -> dict[tuple[str, str, str], float]:
    totals: dict[tuple[str, str], float] = {}
    for row in rows:
        key = (row.role, row.material)
        totals[key] = totals.get(key, 0.0) + row.ratio
    lambdas: dict[tuple[str, str, str], float] = {}
    for row in rows:
        total = totals[(row.role, row.material)]
        if total > 0:
            key = (row.role, row.material, row.smiles)
            lambdas[key] = lambdas.get(key, 0.0) + row.ratio / total
    return lambdas


@dataclass(frozen=True)
class InletRow:
    mix: MixNodeId
    smiles: str
    element: str
    attribute: str
    share: float


class InletAttributeTable:
    """Known attribute shares at inlet mix nodes (boundary data for the LP)."""

    def __init__(self, rows: Iterable[InletRow]):
        self.rows: tuple[InletRow, ...] = tuple(rows)
        self._index: dict[tuple[MixNodeId, str, str], dict[str, float]] = {}
        for row in self.rows:
            slot = self._index.setdefault((row.mix, row.smiles, row.element), {})
            slot[row.attribute] = slot.get(row.attribute, 0.0) + row.share

    def shares(self, mix: MixNodeId, smiles: str, element: str) -> Optional[dict[str, float]]:
        return self._index.get((mix, smiles, element))

    def covered(self, mix: MixNodeId, smiles: str, element: str) -> bool:
        return (mix, smiles, element) in self._index

    def validate(self) -> list[Diagnostic]:
        out = []
        for (mix, smiles, element), shares in self._index.items():
            total = sum(shares.values())
            if abs(total - 1.0) > MU_SUM_TOLERANCE:
                out.append(
                    Diagnostic(
                        "error",
                        "inlet-share-sum",
                        f"{mix} {smiles} [{element}]: attribute shares sum to {total!r}",
                    )
                )
            if any(s < 0 or s > 1 for s in shares.values()):
                out.append(
                    Diagnostic(
                        "error",
                        "inlet-share-range",
                        f"{mix} {smiles} [{element}]: share outside [0, 1]",
                    )
                )
        return out

    def __eq__(self, other):
        return isinstance(other, InletAttributeTable) and self._index == other._index

    def __iter__(self):
        return iter(self.rows)


@dataclass(frozen=True)
class ValueChainGraph:
    mix_nodes: frozenset[MixNodeId]
    production_nodes: dict[ProductionNodeId, BillOfSubstances]
    alpha_edges: dict[tuple, float]  # (MixNodeId, ProductionNodeId) -> alpha
    mu_edges: dict[tuple, float]  # (ProductionNodeId, MixNodeId) -> mu
    ingest_diagnostics: tuple[Diagnostic, ...] = field(compare=False, default=())

    def producers(self, mix: MixNodeId) -> list[ProductionNodeId]:
        return [src for (src, dst) in self.mu_edges if dst == mix]

    def consumers(self, mix: MixNodeId) -> list[ProductionNodeId]:
        return [dst for (src, dst) in self.alpha_edges if src == mix]

    def input_mixes(self, node: ProductionNodeId) -> dict[str, MixNodeId]:
        """Map reactant material -> supplying mix node for one production node."""
        out: dict[str, MixNodeId] = {}
        for (src, dst) in self.alpha_edges:
            if dst == node and isinstance(src, MixNodeId):
                out[src.product] = src
        return out

    def mix_substances(self, mix: MixNodeId) -> list[str]:
        """Substances carried by a mix node.

        Fed mix nodes carry the union of their producers' product substances;
        inlet mix nodes carry whatever their consumers draw from them.
        """
        seen: list[str] = []
        produced = False
        for (src, dst), _ in self.mu_edges.items():
            if dst != mix or src not in self.production_nodes:
                continue
            produced = True
            for s in self.production_nodes[src].substances("product", mix.product):
                if s not in seen:
                    seen.append(s)
        if not produced:
            for (src, dst), _ in self.alpha_edges.items():
                if src != mix or dst not in self.production_nodes:
                    continue
                for s in self.production_nodes[dst].substances("reactant", mix.product):
                    if s not in seen:
                        seen.append(s)
        return seen

    def with_bills(self, bills: Mapping[ProductionNodeId, BillOfSubstances]) -> "ValueChainGraph":
        updated = dict(self.production_nodes)
        updated.update(bills)
        return replace(self, production_nodes=updated)


def _require(record: Mapping[str, str], column: str, table: str, line: int) -> str:
    value = record.get(column)
    if value is None or str(value).strip() == "":
        raise GraphLoadError(f"{table} record {line}: missing column {column!r}")
    return str(value).strip()


def _number(record: Mapping[str, str], column: str, table: str, line: int) -> float:
    raw = _require(record, column, table, line)
    try:
        return float(raw)
    except ValueError:
        raise GraphLoadError(
            f"{table} record {line}: column {column!r} is not a number: {raw!r}"
        ) from None


def load_graph(
    bom_records: Iterable[Mapping],
    bos_records: Iterable[Mapping],
    mix_records: Iterable[Mapping],
    *,
    normalize_mu: bool = True,
    synthesize_terminals: bool = True,
) -> ValueChainGraph:
    """Assemble a ValueChainGraph from bill-of-materials, bill-of-substances
    and consumption-mix records (see the CSV schemas in the package docs)."""
    diagnostics: list[Diagnostic] = []

    material_ratios: dict[ProductionNodeId, dict[tuple[str, str], float]] = {}
    seen_bom: set[tuple] = set()
    for i, rec in enumerate(bom_records):
        node = ProductionNodeId(
            _require(rec, "node_c", "bom", i),
            _require(rec, "node_b", "bom", i),
            _require(rec, "node_g", "bom", i),
        )
        role = _require(rec, "role", "bom", i)
        if role not in ROLES:
            raise GraphLoadError(f"bom record {i}: role must be reactant|product, got {role!r}")
        material = _require(rec, "material", "bom", i)
        ratio = _number(rec, "ratio", "bom", i)
        if ratio < 0:
            raise GraphLoadError(f"bom record {i}: negative ratio for {node} {material}")
        key = (node, role, material)
        if key in seen_bom:
            raise GraphLoadError(f"bom record {i}: duplicate definition of {node} {role} {material}")
        seen_bom.add(key)
        material_ratios.setdefault(node, {})[(role, material)] = ratio

    bill_rows: dict[ProductionNodeId, list[BillRow]] = {}
    for i, rec in enumerate(bos_records):
        node = ProductionNodeId(
            _require(rec, "node_c", "bos", i),
            _require(rec, "node_b", "bos", i),
            _require(rec, "node_g", "bos", i),
        )
        role = _require(rec, "role", "bos", i)
        if role not in ROLES:
            raise GraphLoadError(f"bos record {i}: role must be reactant|product, got {role!r}")
        row = BillRow(
            role=role,
            material=_require(rec, "material", "bos", i),
            smiles=_require(rec, "smiles", "bos", i),
            ratio=_number(rec, "ratio", "bos", i),
        )
        if row.ratio < 0:
            raise GraphLoadError(f"bos record {i}: negative ratio for {node} {row.smiles}")
        bill_rows.setdefault(node, []).append(row)

    for node in bill_rows:
        if node not in material_ratios:
            raise GraphLoadError(f"bos references undefined production node {node}")

    bills: dict[ProductionNodeId, BillOfSubstances] = {}
    for node, ratios in material_ratios.items():
        rows = bill_rows.get(node, [])
        for row in rows:
            if (row.role, row.material) not in ratios:
                inferred = sum(
                    r.ratio for r in rows if (r.role, r.material) == (row.role, row.material)
                )
                ratios[(row.role, row.material)] = inferred
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "material-missing-from-bom",
                        f"{node} {row.role} {row.material}: ratio inferred from "
                        f"substance rows ({inferred!r})",
                    )
                )
        bills[node] = BillOfSubstances.build(node, ratios, rows)

    alpha_edges: dict[tuple, float] = {}
    for node, bill in bills.items():
        for material in bill.materials("reactant"):
            mix = MixNodeId(node.company, material)
            alpha_edges[(mix, node)] = bill.ratio("reactant", material)

    mu_edges: dict[tuple, float] = {}
    for i, rec in enumerate(mix_records):
        mix = MixNodeId(_require(rec, "mix_c", "mix", i), _require(rec, "mix_p", "mix", i))
        src = ProductionNodeId(
            _require(rec, "src_c", "mix", i),
            _require(rec, "src_b", "mix", i),
            _require(rec, "src_g", "mix", i),
        )
        if src not in bills:
            raise GraphLoadError(f"mix record {i}: unknown production node {src}")
        mu = _number(rec, "mu", "mix", i)
        if (src, mix) in mu_edges:
            raise GraphLoadError(f"mix record {i}: duplicate edge {src} -> {mix}")
        mu_edges[(src, mix)] = mu

    if normalize_mu:
        sums: dict[MixNodeId, float] = {}
        for (src, mix), mu in mu_edges.items():
            sums[mix] = sums.get(mix, 0.0) + mu
        for mix, total in sums.items():
            if abs(total - 1.0) <= MU_SUM_TOLERANCE or total <= 0:
                continue
            if abs(total - 1.0) <= MU_NORMALIZE_WINDOW:
                for key in [k for k in mu_edges if k[1] == mix]:
                    mu_edges[key] /= total
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "mu-normalized",
                        f"{mix}: consumption-mix shares summed to {total!r}; normalized",
                    )
                )

    mix_nodes: set[MixNodeId] = set()
    for (mix, _node) in alpha_edges:
        mix_nodes.add(mix)
    for (_node, mix) in mu_edges:
        mix_nodes.add(mix)

    if synthesize_terminals:
        synthesized: dict[MixNodeId, list[ProductionNodeId]] = {}
        for node, bill in bills.items():
            for material in bill.materials("product"):
                has_target = any(
                    src == node and dst.product == material for (src, dst) in mu_edges
                )
                if not has_target:
                    terminal = MixNodeId(node.company, material)
                    synthesized.setdefault(terminal, []).append(node)
        for terminal, producers in synthesized.items():
            share = 1.0 / len(producers)
            if len(producers) > 1:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "terminal-mix-shared",
                        f"{terminal}: synthesized for {len(producers)} producers; "
                        "shares split equally",
                    )
                )
            for node in producers:
                mu_edges[(node, terminal)] = share
            mix_nodes.add(terminal)
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "terminal-mix-synthesized",
                    f"{terminal}: no consumption-mix row for this output; terminal mix added",
                )
            )

    return ValueChainGraph(
        mix_nodes=frozenset(mix_nodes),
        production_nodes=bills,
        alpha_edges=alpha_edges,
        mu_edges=mu_edges,
        ingest_diagnostics=tuple(diagnostics),
    )


def load_inlets(records: Iterable[Mapping]) -> InletAttributeTable:
    rows = []
    for i, rec in enumerate(records):
        rows.append(
            InletRow(
                mix=MixNodeId(_require(rec, "mix_c", "inlet", i), _require(rec, "mix_p", "inlet", i)),
                smiles=_require(rec, "smiles", "inlet", i),
                element=_require(rec, "element", "inlet", i),
                attribute=_require(rec, "attribute", "inlet", i),
                share=_number(rec, "share", "inlet", i),
            )
        )
    return InletAttributeTable(rows)


def inlet_nodes(graph: ValueChainGraph) -> set[MixNodeId]:
    """Mix nodes with no incoming consumption-mix edge (boundary tanks)."""
    fed = {dst for (_src, dst) in graph.mu_edges}
    return {d for d in graph.mix_nodes if d not in fed}


def apply_threshold(bill: BillOfSubstances, min_ratio: float = DEFAULT_TRACE_THRESHOLD) -> BillOfSubstances:
    """Drop substance rows whose mass fraction within their material is below
    min_ratio, then renormalize the remaining fractions."""
    if not 0 <= min_ratio < 1:
        raise ValueError(f"min_ratio must be in [0, 1), got {min_ratio}")
    if min_ratio == 0:
        return bill
    kept: list[BillRow] = []
    for row in bill.rows:
        lam = bill.lam(row.role, row.material, row.smiles)
        if lam < min_ratio:
            log.info(
                "%s: dropping trace substance %s from %s %s (mass fraction %.4g)",
                bill.node,
                row.smiles,
                row.role,
                row.material,
                lam,
            )
            continue
        kept.append(row)
    return BillOfSubstances.build(bill.node, bill.material_ratios, kept)


def aggregate_substances(bill: BillOfSubstances, role: str) -> dict[str, float]:
    """Total kg per kg main output of each substance across the materials of
    one role, preserving first-appearance order."""
    if role not in ROLES:
        raise ValueError(f"role must be reactant|product, got {role!r}")
    out: dict[str, float] = {}
    # Duplicate (material, smiles) rows are already pooled inside lambda
    # normalization, so each pair must contribute exactly once.
    seen: set[tuple[str, str]] = set()
    for row in bill.rows:
        if row.role != role:
            continue
        key = (row.material, row.smiles)
        if key in seen:
            continue
        seen.add(key)
        contribution = bill.ratio(role, row.material) * bill.lam(role, row.material, row.smiles)
        out[row.smiles] = out.get(row.smiles, 0.0) + contribution
    return out


def validate(graph: ValueChainGraph) -> list[Diagnostic]:
    """Structural and numeric checks; errors make the graph unusable for the
    attribute LP, warnings are informational."""
    out: list[Diagnostic] = list(graph.ingest_diagnostics)

    for (src, dst), alpha in graph.alpha_edges.items():
        if not isinstance(src, MixNodeId) or not isinstance(dst, ProductionNodeId):
            out.append(
                Diagnostic(
                    "error",
                    "non-bipartite-edge",
                    f"alpha edge {src} -> {dst} does not go mix -> production",
                )
            )
            continue
        if alpha <= 0:
            out.append(
                Diagnostic("error", "nonpositive-alpha", f"alpha({src} -> {dst}) = {alpha!r}")
            )
        if dst not in graph.production_nodes:
            out.append(Diagnostic("error", "dangling-node", f"alpha edge targets unknown {dst}"))

    mu_sums: dict[MixNodeId, float] = {}
    for (src, dst), mu in graph.mu_edges.items():
        if not isinstance(src, ProductionNodeId) or not isinstance(dst, MixNodeId):
            out.append(
                Diagnostic(
                    "error",
                    "non-bipartite-edge",
                    f"mu edge {src} -> {dst} does not go production -> mix",
                )
            )
            continue
        if not 0 <= mu <= 1:
            out.append(Diagnostic("error", "mu-out-of-range", f"mu({src} -> {dst}) = {mu!r}"))
        if src not in graph.production_nodes:
            out.append(Diagnostic("error", "dangling-node", f"mu edge from unknown {src}"))
        mu_sums[dst] = mu_sums.get(dst, 0.0) + mu

    for mix, total in sorted(mu_sums.items()):
        if abs(total - 1.0) > MU_SUM_TOLERANCE:
            out.append(
                Diagnostic(
                    "error",
                    "mu-sum",
                    f"{mix}: incoming consumption-mix shares sum to {total!r}",
                )
            )

    for node, bill in sorted(graph.production_nodes.items()):
        totals: dict[tuple[str, str], float] = {}
        for row in bill.rows:
            totals[(row.role, row.material)] = totals.get((row.role, row.material), 0.0) + row.ratio
        for (role, material), ratio in bill.material_ratios.items():
            if totals.get((role, material), 0.0) <= 0:
                out.append(
                    Diagnostic(
                        "error",
                        "zero-lambda-material",
                        f"{node} {role} {material}: no substance mass in the bill",
                    )
                )
        has_carbon_product = False
        for smiles in bill.substances("product"):
            try:
                mol = parse_molecule(smiles)
            except SmilesError as exc:
                out.append(
                    Diagnostic("error", "bad-smiles", f"{node}: cannot parse {smiles!r}: {exc}")
                )
                continue
            if mol.count("C") > 0:
                has_carbon_product = True
        if not has_carbon_product:
            out.append(
                Diagnostic(
                    "warning",
                    "no-carbon-product",
                    f"{node}: no carbon-containing product substance",
                )
            )

    inlets = inlet_nodes(graph)
    for mix in sorted(graph.mix_nodes):
        if mix in inlets:
            continue
        carried = set(graph.mix_substances(mix))
        for consumer in graph.consumers(mix):
            bill = graph.production_nodes.get(consumer)
            if bill is None:
                continue
            for smiles in bill.substances("reactant", mix.product):
                if smiles not in carried:
                    out.append(
                        Diagnostic(
                            "warning",
                            "substance-gap",
                            f"{mix}: consumer {consumer} draws {smiles} which no "
                            "producer delivers",
                        )
                    )
    return out
