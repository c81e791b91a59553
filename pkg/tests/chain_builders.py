"""Programmatic value-chain builders used across the attribution tests.

The random generator produces *consistent* systems: every atom-bill row sum
and every consumption mix sums to one, and every inlet is covered, so the
LP solution must agree with the fixed-point oracle and carry zero slack.
"""

from __future__ import annotations

import numpy as np

from carat.atombill import MaterialAtomBill, PhiRow, PsiRow, SubstanceAtomBill, derive_psi
from carat.graph import (
    BillOfSubstances,
    BillRow,
    InletAttributeTable,
    InletRow,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
)

CARBON_POOL = ["C", "CC", "CCC", "CCO", "OCCO", "CCCC", "CCCCC", "OCC#CCO"]
ATTRIBUTES = ("fossil", "biogenic")


def inlet_rows(mix: MixNodeId, smiles: str, biogenic: float) -> list[InletRow]:
    return [
        InletRow(mix, smiles, "C", "fossil", 1.0 - biogenic),
        InletRow(mix, smiles, "C", "biogenic", biogenic),
    ]


def one_node_system(biogenic_material2: float = 1.0):
    """The worked single-node example: material 1 is 80% TDA / 20% CO,
    material 2 is pure CO, product TDI; phi is 7/9 TDA and 2/9 CO."""
    tda = "Cc1ccc(N)cc1N"
    co = "[C-]#[O+]"
    tdi = "Cc1ccc(N=C=O)cc1N=C=O"

    node = ProductionNodeId("COMP1", "PLNT1", "MAT3")
    bill = BillOfSubstances.build(
        node,
        {
            ("reactant", "MAT1"): 1 / 3,
            ("reactant", "MAT2"): 2 / 3,
            ("product", "MAT3"): 2.28,
        },
        [
            BillRow("reactant", "MAT1", tda, 0.8 / 3),
            BillRow("reactant", "MAT1", co, 0.2 / 3),
            BillRow("reactant", "MAT2", co, 2 / 3),
            BillRow("product", "MAT3", tdi, 2.28),
        ],
    )
    d1 = MixNodeId("COMP1", "MAT1")
    d2 = MixNodeId("COMP1", "MAT2")
    d3 = MixNodeId("COMP1", "MAT3")
    graph = ValueChainGraph(
        mix_nodes=frozenset({d1, d2, d3}),
        production_nodes={node: bill},
        alpha_edges={(d1, node): 1 / 3, (d2, node): 2 / 3},
        mu_edges={(node, d3): 1.0},
    )

    phi = SubstanceAtomBill(
        rows=(
            PhiRow(tda, tdi, "C", 7, 9),
            PhiRow(co, tdi, "C", 2, 9),
        )
    )
    psi = {node: derive_psi(phi, bill)}

    inlets = InletAttributeTable(
        inlet_rows(d1, tda, 0.0)
        + inlet_rows(d1, co, 0.0)
        + inlet_rows(d2, co, biogenic_material2)
    )
    return graph, psi, inlets


def two_node_cycle(inlet_bio: float = 1.0):
    """One production node fed half from an inlet and half from its own
    recycle mix; analytic fixed point equals the inlet share."""
    node = ProductionNodeId("C1", "B1", "R")
    feed = MixNodeId("C1", "FEED")
    recycle = MixNodeId("C1", "R")
    outlet = MixNodeId("C9", "R")

    bill = BillOfSubstances.build(
        node,
        {("reactant", "FEED"): 1.0, ("reactant", "R"): 1.0, ("product", "R"): 2.0},
        [
            BillRow("reactant", "FEED", "C", 1.0),
            BillRow("reactant", "R", "C", 1.0),
            BillRow("product", "R", "C", 2.0),
        ],
    )
    graph = ValueChainGraph(
        mix_nodes=frozenset({feed, recycle, outlet}),
        production_nodes={node: bill},
        alpha_edges={(feed, node): 1.0, (recycle, node): 1.0},
        mu_edges={(node, recycle): 1.0, (node, outlet): 1.0},
    )
    psi = {
        node: MaterialAtomBill(
            node,
            rows=(
                PsiRow("FEED", "C", "R", "C", "C", 0.5, 1),
                PsiRow("R", "C", "R", "C", "C", 0.5, 1),
            ),
        )
    }
    inlets = InletAttributeTable(inlet_rows(feed, "C", inlet_bio))
    return graph, psi, inlets


class _ChainDraft:
    """Mutable scaffolding for the random generator."""

    def __init__(self):
        self.substances_of: dict[MixNodeId, list[str]] = {}
        self.alpha_edges: dict[tuple, float] = {}
        self.mu_edges: dict[tuple, float] = {}
        self.bill_ratios: dict[ProductionNodeId, dict] = {}
        self.bill_rows: dict[ProductionNodeId, list[BillRow]] = {}
        self.psi_rows: dict[ProductionNodeId, list[PsiRow]] = {}

    def add_input(self, rng, node: ProductionNodeId, mix: MixNodeId) -> None:
        alpha = float(rng.uniform(0.2, 2.0))
        self.alpha_edges[(mix, node)] = alpha
        self.bill_ratios[node][("reactant", mix.product)] = alpha
        share = 1.0 / len(self.substances_of[mix])
        for smiles in self.substances_of[mix]:
            self.bill_rows[node].append(BillRow("reactant", mix.product, smiles, alpha * share))

    def add_output(self, rng, node: ProductionNodeId, material: str, substances: list[str]) -> None:
        self.bill_ratios[node][("product", material)] = 1.0
        for smiles in substances:
            self.bill_rows[node].append(
                BillRow("product", material, smiles, 1.0 / len(substances))
            )

    def input_pairs(self, node: ProductionNodeId) -> list[tuple[str, str]]:
        return [
            (mix.product, smiles)
            for (mix, dst) in self.alpha_edges
            if dst == node
            for smiles in self.substances_of[mix]
        ]

    def stochastic_psi(self, rng, node: ProductionNodeId, material: str, substances: list[str]) -> None:
        pairs = self.input_pairs(node)
        for product_smiles in substances:
            weights = rng.uniform(0.1, 1.0, size=len(pairs))
            weights = weights / weights.sum()
            for (src_material, src_smiles), w in zip(pairs, weights):
                self.psi_rows[node].append(
                    PsiRow(src_material, src_smiles, material, product_smiles, "C", float(w), 1)
                )


def random_consistent_chain(seed: int, force_cycle: bool = False):
    """Random bipartite chain of at most 10 nodes with stochastic psi/mu rows.

    Returns (graph, psi, inlets, cyclic).
    """
    rng = np.random.default_rng(seed)
    draft = _ChainDraft()

    n_inlets = int(rng.integers(1, 3))
    n_prod = int(rng.integers(1, 4))

    inlet_mixes: list[MixNodeId] = []
    inlet_table: list[InletRow] = []
    for k in range(n_inlets):
        mix = MixNodeId("CIN", f"IN{k}")
        picks = sorted(rng.choice(CARBON_POOL, size=int(rng.integers(1, 3)), replace=False))
        inlet_mixes.append(mix)
        draft.substances_of[mix] = list(picks)
        for smiles in picks:
            inlet_table.extend(inlet_rows(mix, smiles, float(rng.uniform(0, 0.9))))

    available: list[MixNodeId] = list(inlet_mixes)
    nodes: list[ProductionNodeId] = []
    out_mix_of: dict[ProductionNodeId, MixNodeId] = {}
    out_subs_of: dict[ProductionNodeId, list[str]] = {}

    for i in range(n_prod):
        node = ProductionNodeId("CP", f"B{i}", f"OUT{i}")
        nodes.append(node)
        draft.bill_ratios[node] = {}
        draft.bill_rows[node] = []
        draft.psi_rows[node] = []

        n_inputs = int(rng.integers(1, min(2, len(available)) + 1))
        chosen_idx = rng.choice(len(available), size=n_inputs, replace=False)
        for j in chosen_idx:
            draft.add_input(rng, node, available[int(j)])

        material = f"OUT{i}"
        substances = sorted(
            rng.choice(CARBON_POOL, size=int(rng.integers(1, 3)), replace=False)
        )
        draft.add_output(rng, node, material, substances)
        draft.stochastic_psi(rng, node, material, substances)

        out_mix = MixNodeId("CP", material)
        draft.substances_of[out_mix] = list(substances)
        draft.mu_edges[(node, out_mix)] = 1.0
        out_mix_of[node] = out_mix
        out_subs_of[node] = substances
        available.append(out_mix)

    cyclic = False
    if force_cycle or rng.uniform() < 0.35:
        # Feed the last node's output back into the first node and rebuild
        # the first node's atom bill. Fresh sources keep a weight floor, so
        # the loop stays a contraction with a unique fixed point.
        consumer = nodes[0]
        recycled = out_mix_of[nodes[-1]]
        if (recycled, consumer) not in draft.alpha_edges:
            draft.add_input(rng, consumer, recycled)
            draft.psi_rows[consumer] = []
            draft.stochastic_psi(rng, consumer, "OUT0", out_subs_of[consumer])
            cyclic = True

    # Occasionally let a later node co-produce an earlier material so some
    # mixes blend two producers.
    if n_prod >= 2 and rng.uniform() < 0.5:
        donor = nodes[-1]
        target = nodes[0]
        material = "OUT0"
        if donor != target:
            substances = out_subs_of[target]
            draft.add_output(rng, donor, material, substances)
            draft.stochastic_psi(rng, donor, material, substances)
            split = float(rng.uniform(0.2, 0.8))
            draft.mu_edges[(target, out_mix_of[target])] = split
            draft.mu_edges[(donor, out_mix_of[target])] = 1.0 - split

    production_nodes = {
        node: BillOfSubstances.build(node, draft.bill_ratios[node], draft.bill_rows[node])
        for node in nodes
    }
    psi = {node: MaterialAtomBill(node, rows=tuple(draft.psi_rows[node])) for node in nodes}
    mix_nodes = set(draft.substances_of)

    graph = ValueChainGraph(
        mix_nodes=frozenset(mix_nodes),
        production_nodes=production_nodes,
        alpha_edges=draft.alpha_edges,
        mu_edges=draft.mu_edges,
    )
    inlets = InletAttributeTable(inlet_table)
    return graph, psi, inlets, cyclic


def constraint_dependencies(graph: ValueChainGraph, psi) -> dict:
    """Node-level dependency edges implied by the propagation equations,
    used to check for cycles independently of the LP builder."""
    from carat.graph import inlet_nodes

    deps: dict = {node: set() for node in graph.production_nodes}
    inlets = inlet_nodes(graph)
    for node in graph.production_nodes:
        input_mixes = graph.input_mixes(node)
        node_psi = psi.get(node)
        if node_psi is None:
            continue
        for row in node_psi.rows:
            source = input_mixes.get(row.reactant_material)
            if source is not None and source not in inlets:
                deps[node].add(source)
    for (src, dst), _mu in graph.mu_edges.items():
        deps.setdefault(dst, set()).add(src)
    return deps


def has_dependency_cycle(deps: dict) -> bool:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in deps}

    def visit(node) -> bool:
        color[node] = GRAY
        for nxt in deps.get(node, ()):
            if nxt not in color:
                continue
            if color[nxt] == GRAY:
                return True
            if color[nxt] == WHITE and visit(nxt):
                return True
        color[node] = BLACK
        return False

    return any(color[node] == WHITE and visit(node) for node in deps)


def bump_inlet(inlets: InletAttributeTable, mix: MixNodeId, smiles: str, delta: float):
    """Raise one inlet's biogenic share by delta, lowering fossil to match."""
    rows = []
    for row in inlets:
        if row.mix == mix and row.smiles == smiles and row.element == "C":
            if row.attribute == "biogenic":
                rows.append(InletRow(row.mix, row.smiles, "C", "biogenic", row.share + delta))
            else:
                rows.append(InletRow(row.mix, row.smiles, "C", "fossil", row.share - delta))
        else:
            rows.append(row)
    return InletAttributeTable(rows)
