"""The slack-minimizing attribute LP over a whole value chain.

Variables are attribute shares beta at production nodes (node, material,
substance, element, attribute) and at mix nodes (node, substance, element,
attribute), each in [0, 1], plus a (z >= 0, q <= 0) slack pair per
normalization constraint. Propagation ties production betas to their input
mixes through the material-level atom bill and mix betas to their producers
through consumption-mix shares; inlet mix nodes enter as fixed constants.
The objective minimizes total slack, so a fully consistent dataset solves
with objective zero and the slack pattern localizes data problems otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .atombill import MaterialAtomBill
from .diagnostics import Diagnostic, errors as error_diagnostics
from .graph import (
    InletAttributeTable,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
    inlet_nodes,
    validate,
)
from .simplex import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    solve_standard_form,
)

DEFAULT_ATTRIBUTES = ("fossil", "biogenic")
DEFAULT_ELEMENTS = ("C",)
FEASIBILITY_TOLERANCE = 1e-9


class LpBuildError(ValueError):
    pass


def _element_counts(smiles: str, cache: dict) -> dict[str, int]:
    from .smiles import parse_molecule

    if smiles not in cache:
        cache[smiles] = parse_molecule(smiles).element_counts
    return cache[smiles]


@dataclass
class AttributeLP:
    """Equality-form LP: min c'x, A x = b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    columns: list[tuple]
    row_labels: list[str]
    prod_beta: dict[tuple, int]
    mix_beta: dict[tuple, int]
    prod_slack: dict[tuple, tuple[int, int]]  # (t, p, s, e) -> (z col, qhat col)
    mix_slack: dict[tuple, tuple[int, int]]  # (d, s, e) -> (z col, qhat col)
    inlet_beta: dict[tuple, float]  # (d, s, e, a) -> fixed share h
    attributes: tuple[str, ...]
    elements: tuple[str, ...]
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def n_variables(self) -> int:
        return self.A.shape[1]

    @property
    def n_constraints(self) -> int:
        return self.A.shape[0]

    def dump(self) -> str:
        """One constraint per line, for audit."""
        lines = [f"min {_linear_form(self.c, self.columns)}"]
        for i, label in enumerate(self.row_labels):
            lines.append(f"{label}: {_linear_form(self.A[i], self.columns)} = {self.b[i]:.12g}")
        return "\n".join(lines)


def _linear_form(coeffs: np.ndarray, columns: list[tuple]) -> str:
    terms = []
    for coef, col in zip(coeffs, columns):
        if coef == 0:
            continue
        name = _column_name(col)
        if coef == 1:
            terms.append(f"+ {name}")
        elif coef == -1:
            terms.append(f"- {name}")
        else:
            terms.append(f"{coef:+.12g} {name}")
    return " ".join(terms) if terms else "0"


def _column_name(col: tuple) -> str:
    kind = col[0]
    body = "|".join(str(part) for part in col[1:])
    return f"{kind}[{body}]"


def build_lp(
    graph: ValueChainGraph,
    psi: Mapping[ProductionNodeId, MaterialAtomBill],
    inlets: InletAttributeTable,
    attributes: Sequence[str] = DEFAULT_ATTRIBUTES,
    elements: Sequence[str] = DEFAULT_ELEMENTS,
    *,
    strict: bool = True,
) -> AttributeLP:
    """Assemble the LP; with strict=False, error-severity graph diagnostics
    are carried along instead of raising, leaving the slack machinery to
    absorb and localize the inconsistency."""
    attributes = tuple(attributes)
    elements = tuple(elements)
    diagnostics: list[Diagnostic] = []

    graph_errors = error_diagnostics(validate(graph))
    if graph_errors:
        if strict:
            raise LpBuildError(
                "graph has error-severity diagnostics: "
                + "; ".join(str(d) for d in graph_errors[:5])
            )
        diagnostics.extend(graph_errors)
    for node in psi:
        if node not in graph.production_nodes:
            raise LpBuildError(f"atom bill supplied for unknown node {node}")

    counts_cache: dict[str, dict[str, int]] = {}

    def tracked(smiles: str) -> list[str]:
        counts = _element_counts(smiles, counts_cache)
        return [e for e in elements if counts.get(e, 0) > 0]

    inlet_set = inlet_nodes(graph)

    # Forward reachability from inlet mixes.
    reachable: set = set(inlet_set)
    frontier: list = list(inlet_set)
    while frontier:
        node = frontier.pop()
        if isinstance(node, MixNodeId):
            for consumer in graph.consumers(node):
                if consumer not in reachable:
                    reachable.add(consumer)
                    frontier.append(consumer)
        else:
            for (src, dst) in graph.mu_edges:
                if src == node and dst not in reachable:
                    reachable.add(dst)
                    frontier.append(dst)

    # Fixed inlet shares.
    inlet_beta: dict[tuple, float] = {}
    for mix in sorted(inlet_set):
        for consumer in graph.consumers(mix):
            bill = graph.production_nodes[consumer]
            for smiles in bill.substances("reactant", mix.product):
                for element in tracked(smiles):
                    shares = inlets.shares(mix, smiles, element)
                    if shares is None:
                        raise LpBuildError(
                            f"inlet {mix} supplies {smiles} [{element}] but the inlet "
                            "table does not cover it"
                        )
                    for attribute in attributes:
                        inlet_beta[(mix, smiles, element, attribute)] = shares.get(
                            attribute, 0.0
                        )

    # Variable enumeration (deterministic order).
    prod_beta_keys: list[tuple] = []
    prod_slack_keys: list[tuple] = []
    for node in sorted(graph.production_nodes):
        if node not in reachable:
            continue
        bill = graph.production_nodes[node]
        for material in sorted(bill.materials("product")):
            for smiles in sorted(bill.substances("product", material)):
                for element in tracked(smiles):
                    prod_slack_keys.append((node, material, smiles, element))
                    for attribute in attributes:
                        prod_beta_keys.append((node, material, smiles, element, attribute))

    mix_beta_keys: list[tuple] = []
    mix_slack_keys: list[tuple] = []
    for mix in sorted(graph.mix_nodes):
        if mix in inlet_set or mix not in reachable:
            continue
        for smiles in sorted(graph.mix_substances(mix)):
            for element in tracked(smiles):
                mix_slack_keys.append((mix, smiles, element))
                for attribute in attributes:
                    mix_beta_keys.append((mix, smiles, element, attribute))

    columns: list[tuple] = []
    prod_beta: dict[tuple, int] = {}
    mix_beta: dict[tuple, int] = {}
    for key in prod_beta_keys:
        prod_beta[key] = len(columns)
        columns.append(("beta_t", *key))
    for key in mix_beta_keys:
        mix_beta[key] = len(columns)
        columns.append(("beta_d", *key))
    prod_slack: dict[tuple, tuple[int, int]] = {}
    for key in prod_slack_keys:
        z = len(columns)
        columns.append(("z_t", *key))
        q = len(columns)
        columns.append(("q_t", *key))
        prod_slack[key] = (z, q)
    mix_slack: dict[tuple, tuple[int, int]] = {}
    for key in mix_slack_keys:
        z = len(columns)
        columns.append(("z_d", *key))
        q = len(columns)
        columns.append(("q_d", *key))
        mix_slack[key] = (z, q)
    bound_cols: dict[int, int] = {}
    for key in prod_beta_keys:
        bound_cols[prod_beta[key]] = len(columns)
        columns.append(("u", *key))
    for key in mix_beta_keys:
        bound_cols[mix_beta[key]] = len(columns)
        columns.append(("u", *key))

    n = len(columns)
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    labels: list[str] = []

    def add_row(coeffs: dict[int, float], value: float, label: str) -> None:
        row = np.zeros(n)
        for col, coef in coeffs.items():
            row[col] += coef
        rows.append(row)
        rhs.append(value)
        labels.append(label)

    # (b) production propagation
    for key in prod_beta_keys:
        node, material, smiles, element, attribute = key
        bill = graph.production_nodes[node]
        node_psi = psi.get(node)
        psi_rows = (
            node_psi.by_product(material, smiles, element) if node_psi is not None else []
        )
        if not psi_rows:
            if attribute == attributes[0]:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "no-mapped-origin",
                        f"{node} {material} {smiles} [{element}]: no atom-bill rows; "
                        "normalization relies on slack",
                    )
                )
            continue
        input_mixes = graph.input_mixes(node)
        coeffs = {prod_beta[key]: 1.0}
        constant = 0.0
        for psi_row in psi_rows:
            mix = input_mixes.get(psi_row.reactant_material)
            if mix is None:
                raise LpBuildError(
                    f"{node}: atom bill references input material "
                    f"{psi_row.reactant_material!r} with no supplying mix"
                )
            if mix in inlet_set:
                constant += psi_row.share * inlet_beta[
                    (mix, psi_row.reactant_smiles, element, attribute)
                ]
            else:
                var = mix_beta.get((mix, psi_row.reactant_smiles, element, attribute))
                if var is None:
                    if attribute == attributes[0]:
                        diagnostics.append(
                            Diagnostic(
                                "warning",
                                "propagation-gap",
                                f"{node}: input {psi_row.reactant_smiles} [{element}] "
                                f"expected from {mix} but never produced there",
                            )
                        )
                    continue
                coeffs[var] = coeffs.get(var, 0.0) - psi_row.share
        add_row(coeffs, constant, f"prop_t[{node}|{material}|{smiles}|{element}|{attribute}]")

    # (c) mix propagation
    for key in mix_beta_keys:
        mix, smiles, element, attribute = key
        coeffs = {mix_beta[key]: 1.0}
        for (src, dst), mu in sorted(graph.mu_edges.items(), key=lambda kv: str(kv[0])):
            if dst != mix:
                continue
            var = prod_beta.get((src, mix.product, smiles, element, attribute))
            if var is None:
                if attribute == attributes[0]:
                    diagnostics.append(
                        Diagnostic(
                            "warning",
                            "mix-gap",
                            f"{mix}: producer {src} delivers no {smiles} [{element}]",
                        )
                    )
                continue
            coeffs[var] = coeffs.get(var, 0.0) - mu
        add_row(coeffs, 0.0, f"prop_d[{mix}|{smiles}|{element}|{attribute}]")

    # (d)/(e) normalization with slack: sum_a beta - z + qhat = 1
    for key in prod_slack_keys:
        node, material, smiles, element = key
        z, q = prod_slack[key]
        coeffs = {z: -1.0, q: 1.0}
        for attribute in attributes:
            coeffs[prod_beta[(node, material, smiles, element, attribute)]] = 1.0
        add_row(coeffs, 1.0, f"norm_t[{node}|{material}|{smiles}|{element}]")
    for key in mix_slack_keys:
        mix, smiles, element = key
        z, q = mix_slack[key]
        coeffs = {z: -1.0, q: 1.0}
        for attribute in attributes:
            coeffs[mix_beta[(mix, smiles, element, attribute)]] = 1.0
        add_row(coeffs, 1.0, f"norm_d[{mix}|{smiles}|{element}]")

    # beta upper bounds: beta + u = 1
    for beta_col, u_col in bound_cols.items():
        add_row({beta_col: 1.0, u_col: 1.0}, 1.0, f"ub[{_column_name(columns[beta_col])}]")

    c = np.zeros(n)
    for z, q in list(prod_slack.values()) + list(mix_slack.values()):
        c[z] = 1.0
        c[q] = 1.0

    A = np.vstack(rows) if rows else np.zeros((0, n))
    b = np.array(rhs)

    return AttributeLP(
        c=c,
        A=A,
        b=b,
        columns=columns,
        row_labels=labels,
        prod_beta=prod_beta,
        mix_beta=mix_beta,
        prod_slack=prod_slack,
        mix_slack=mix_slack,
        inlet_beta=inlet_beta,
        attributes=attributes,
        elements=elements,
        diagnostics=tuple(diagnostics),
    )


@dataclass(frozen=True)
class AttributeSolution:
    status: str
    total_slack: float
    production_beta: dict[tuple, float]
    mix_beta: dict[tuple, float]
    inlet_beta: dict[tuple, float]
    production_slack: dict[tuple, tuple[float, float]]  # (t,p,s,e) -> (z, q<=0)
    mix_slack: dict[tuple, tuple[float, float]]
    max_residual: float
    iterations: int
    attributes: tuple[str, ...]
    elements: tuple[str, ...]

    def beta(self, node, smiles: str, element: str = "C", attribute: str = "biogenic",
             material: Optional[str] = None) -> float:
        """Share lookup for either node kind; production lookups may leave the
        material implicit when the substance sits in a single material."""
        if isinstance(node, MixNodeId):
            if (node, smiles, element, attribute) in self.mix_beta:
                return self.mix_beta[(node, smiles, element, attribute)]
            return self.inlet_beta[(node, smiles, element, attribute)]
        hits = [
            value
            for (t, p, s, e, a), value in self.production_beta.items()
            if t == node
            and s == smiles
            and e == element
            and a == attribute
            and (material is None or p == material)
        ]
        if not hits:
            raise KeyError((node, material, smiles, element, attribute))
        if material is None and len(hits) > 1:
            raise KeyError(f"{node} {smiles}: substance appears in several materials")
        return hits[0]


def solve(lp: AttributeLP, *, tolerance: float = FEASIBILITY_TOLERANCE) -> AttributeSolution:
    result = solve_standard_form(lp.c, lp.A, lp.b, tol=tolerance)
    if result.status == INFEASIBLE:
        raise RuntimeError(
            "attribute LP reported infeasible; slack variables should make this "
            "impossible, so the builder produced a broken system"
        )

    x = result.x
    production_beta = {key: float(x[col]) for key, col in lp.prod_beta.items()}
    mix_beta = {key: float(x[col]) for key, col in lp.mix_beta.items()}
    production_slack = {
        key: (float(x[z]), -float(x[q])) for key, (z, q) in lp.prod_slack.items()
    }
    mix_slack = {key: (float(x[z]), -float(x[q])) for key, (z, q) in lp.mix_slack.items()}

    if lp.A.size:
        residual = float(np.max(np.abs(lp.A @ x - lp.b)))
    else:
        residual = 0.0

    return AttributeSolution(
        status=result.status,
        total_slack=float(result.objective),
        production_beta=production_beta,
        mix_beta=mix_beta,
        inlet_beta=dict(lp.inlet_beta),
        production_slack=production_slack,
        mix_slack=mix_slack,
        max_residual=residual,
        iterations=result.iterations,
        attributes=lp.attributes,
        elements=lp.elements,
    )


def slack_report(solution: AttributeSolution, *, cutoff: float = 1e-12) -> list[tuple]:
    """(node, material, smiles, element, z, q, magnitude), largest first."""
    entries = []
    for (node, material, smiles, element), (z, q) in solution.production_slack.items():
        magnitude = abs(z) + abs(q)
        if magnitude > cutoff:
            entries.append((node, material, smiles, element, z, q, magnitude))
    for (mix, smiles, element), (z, q) in solution.mix_slack.items():
        magnitude = abs(z) + abs(q)
        if magnitude > cutoff:
            entries.append((mix, mix.product, smiles, element, z, q, magnitude))
    entries.sort(key=lambda e: (-e[6], str(e[0]), e[1], e[2], e[3]))
    return entries


@dataclass(frozen=True)
class OracleResult:
    converged: bool
    sweeps: int
    residual: float
    production_beta: dict[tuple, float]
    mix_beta: dict[tuple, float]


def fixed_point_oracle(
    graph: ValueChainGraph,
    psi: Mapping[ProductionNodeId, MaterialAtomBill],
    inlets: InletAttributeTable,
    attributes: Sequence[str] = DEFAULT_ATTRIBUTES,
    elements: Sequence[str] = DEFAULT_ELEMENTS,
    *,
    tolerance: float = 1e-10,
    max_sweeps: int = 10_000,
    damping: float = 1.0,
) -> OracleResult:
    """Damped Jacobi iteration of the propagation equations.

    Independent cross-check for the LP on fully consistent data (atom-bill
    row sums and consumption mixes equal to one); diverges or stalls when the
    data is inconsistent, which is exactly where only the LP applies.
    """
    from .smiles import parse_molecule

    attributes = tuple(attributes)
    elements = tuple(elements)
    counts_cache: dict[str, dict[str, int]] = {}

    def tracked(smiles: str) -> list[str]:
        if smiles not in counts_cache:
            counts_cache[smiles] = parse_molecule(smiles).element_counts
        return [e for e in elements if counts_cache[smiles].get(e, 0) > 0]

    inlet_set = inlet_nodes(graph)

    prod_keys: list[tuple] = []
    for node, bill in sorted(graph.production_nodes.items()):
        for material in sorted(bill.materials("product")):
            for smiles in sorted(bill.substances("product", material)):
                for element in tracked(smiles):
                    for attribute in attributes:
                        prod_keys.append((node, material, smiles, element, attribute))
    mix_keys: list[tuple] = []
    for mix in sorted(graph.mix_nodes):
        if mix in inlet_set:
            continue
        for smiles in sorted(graph.mix_substances(mix)):
            for element in tracked(smiles):
                for attribute in attributes:
                    mix_keys.append((mix, smiles, element, attribute))

    prod = {key: 0.0 for key in prod_keys}
    mix = {key: 0.0 for key in mix_keys}

    def mix_value(node: MixNodeId, smiles: str, element: str, attribute: str) -> float:
        if node in inlet_set:
            shares = inlets.shares(node, smiles, element)
            return 0.0 if shares is None else shares.get(attribute, 0.0)
        return mix.get((node, smiles, element, attribute), 0.0)

    residual = float("inf")
    for sweep in range(1, max_sweeps + 1):
        new_prod: dict[tuple, float] = {}
        for key in prod_keys:
            node, material, smiles, element, attribute = key
            node_psi = psi.get(node)
            if node_psi is None:
                new_prod[key] = prod[key]
                continue
            rows = node_psi.by_product(material, smiles, element)
            if not rows:
                new_prod[key] = prod[key]
                continue
            input_mixes = graph.input_mixes(node)
            total = 0.0
            for row in rows:
                source = input_mixes.get(row.reactant_material)
                if source is None:
                    continue
                total += row.share * mix_value(source, row.reactant_smiles, element, attribute)
            new_prod[key] = total
        new_mix: dict[tuple, float] = {}
        for key in mix_keys:
            node, smiles, element, attribute = key
            total = 0.0
            for (src, dst), mu in graph.mu_edges.items():
                if dst != node:
                    continue
                total += mu * prod.get((src, node.product, smiles, element, attribute), 0.0)
            new_mix[key] = total

        residual = 0.0
        for key in prod_keys:
            updated = prod[key] + damping * (new_prod[key] - prod[key])
            residual = max(residual, abs(updated - prod[key]))
            prod[key] = updated
        for key in mix_keys:
            updated = mix[key] + damping * (new_mix[key] - mix[key])
            residual = max(residual, abs(updated - mix[key]))
            mix[key] = updated
        if residual < tolerance:
            return OracleResult(True, sweep, residual, prod, mix)

    return OracleResult(False, max_sweeps, residual, prod, mix)
