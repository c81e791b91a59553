"""Estimator-style front end: fit a value chain, predict attribute shares.

AttributeTracer composes the whole pipeline (trace threshold, mole
estimation, reaction construction, atom mapping, atom bills, LP solve)
behind the familiar fit/predict surface, so it slots into scikit-learn
tooling (get_params/set_params, cloning) and scripted use alike.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .atombill import (
    MaterialAtomBill,
    ReactionPlan,
    SubstanceAtomBill,
    build_reaction_smiles,
    compute_moles,
    derive_phi,
    derive_psi,
)
from .attribution import build_lp, fixed_point_oracle, solve
from .diagnostics import Diagnostic, errors as error_diagnostics
from .graph import (
    DEFAULT_TRACE_THRESHOLD,
    InletAttributeTable,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
    apply_threshold,
    inlet_nodes,
    validate,
)
from .mapping import MappingProvider
from .reports import product_bcc


def check_value_chain(graph: ValueChainGraph) -> None:
    """Raise with every error-severity diagnostic listed."""
    problems = error_diagnostics(validate(graph))
    if problems:
        raise ValueError(
            "value chain failed validation:\n" + "\n".join(str(d) for d in problems)
        )


def check_inlets(graph: ValueChainGraph, inlets: InletAttributeTable) -> None:
    problems = inlets.validate()
    if problems:
        raise ValueError(
            "inlet table failed validation:\n" + "\n".join(str(d) for d in problems)
        )


def derive_atom_bills(
    graph: ValueChainGraph,
    mapper: MappingProvider,
    *,
    elements: Sequence[str] = ("C",),
    multiplicity_cap: int = 6,
    token_limit: int = 512,
) -> tuple[dict[ProductionNodeId, MaterialAtomBill], dict[ProductionNodeId, list[ReactionPlan]]]:
    """Run mole estimation, reaction construction and atom mapping for every
    node that produces a tracked element; returns psi tables and the plans."""
    from .smiles import parse_molecule

    psi: dict[ProductionNodeId, MaterialAtomBill] = {}
    plans_by_node: dict[ProductionNodeId, list[ReactionPlan]] = {}

    all_plans: list[ReactionPlan] = []
    for node in sorted(graph.production_nodes):
        bill = graph.production_nodes[node]
        tracked_products = [
            s
            for s in bill.substances("product")
            if any(parse_molecule(s).element_counts.get(e, 0) > 0 for e in elements)
        ]
        if not tracked_products:
            continue
        moles = compute_moles(bill)
        plans = build_reaction_smiles(
            bill,
            moles,
            elements=elements,
            multiplicity_cap=multiplicity_cap,
            token_limit=token_limit,
        )
        plans_by_node[node] = plans
        all_plans.extend(plans)

    if all_plans:
        mapped = mapper.map_reactions([p.text for p in all_plans])
        mapped_of = dict(zip((id(p) for p in all_plans), mapped))
        for node, plans in plans_by_node.items():
            bill = graph.production_nodes[node]
            phi = derive_phi([mapped_of[id(p)] for p in plans], elements, plans=plans)
            psi[node] = derive_psi(phi, bill)
    return psi, plans_by_node


class AttributeTracer(BaseEstimator):
    """Solve elemental attribute shares for a whole value chain.

    Parameters follow scikit-learn conventions: everything configurable is a
    constructor argument, fit(graph, inlets) performs the work, and fitted
    state lands in trailing-underscore attributes.
    """

    def __init__(
        self,
        elements: tuple[str, ...] = ("C",),
        attributes: tuple[str, ...] = ("fossil", "biogenic"),
        mapper: Optional[MappingProvider] = None,
        trace_threshold: float = DEFAULT_TRACE_THRESHOLD,
        multiplicity_cap: int = 6,
        token_limit: int = 512,
        strict: bool = True,
        run_oracle_check: bool = False,
    ):
        self.elements = elements
        self.attributes = attributes
        self.mapper = mapper
        self.trace_threshold = trace_threshold
        self.multiplicity_cap = multiplicity_cap
        self.token_limit = token_limit
        self.strict = strict
        self.run_oracle_check = run_oracle_check

    def fit(self, X: ValueChainGraph, y: Optional[InletAttributeTable] = None, **fit_params):
        """X is the value chain graph; y the inlet attribute table."""
        graph = X
        inlets = y if y is not None else fit_params.get("inlets")
        if inlets is None:
            raise ValueError("fit requires the inlet attribute table as y")
        if self.mapper is None:
            raise ValueError("an atom-mapping provider must be configured")
        if self.strict:
            check_value_chain(graph)
        check_inlets(graph, inlets)

        trimmed = graph.with_bills(
            {
                node: apply_threshold(bill, self.trace_threshold)
                for node, bill in graph.production_nodes.items()
            }
        )

        psi, plans = derive_atom_bills(
            trimmed,
            self.mapper,
            elements=self.elements,
            multiplicity_cap=self.multiplicity_cap,
            token_limit=self.token_limit,
        )
        lp = build_lp(
            trimmed, psi, inlets, self.attributes, self.elements, strict=self.strict
        )
        solution = solve(lp)

        self.graph_ = trimmed
        self.inlets_ = inlets
        self.psi_ = psi
        self.plans_ = plans
        self.lp_ = lp
        self.solution_ = solution
        self.total_slack_ = solution.total_slack
        self.status_ = solution.status
        self.diagnostics_: tuple[Diagnostic, ...] = tuple(lp.diagnostics)
        for bills in psi.values():
            self.diagnostics_ += tuple(bills.diagnostics)

        if self.run_oracle_check:
            self.oracle_ = fixed_point_oracle(
                trimmed, psi, inlets, self.attributes, self.elements
            )
        return self

    def predict(self, X: Optional[Sequence[tuple]] = None) -> np.ndarray:
        """Biogenic-style share for (node, smiles) queries.

        Without an argument, returns the carbon-weighted shares of the
        terminal products in deterministic node order.
        """
        self._check_fitted()
        target = self.attributes[-1]
        if X is None:
            table = product_bcc(self.graph_, self.solution_, attribute=target)
            return np.array([table[key] for key in sorted(table, key=str)])
        values = []
        for node, smiles in X:
            values.append(self.solution_.beta(node, smiles, self.elements[0], target))
        return np.array(values)

    def predict_products(self) -> dict[MixNodeId, float]:
        """Carbon-weighted terminal-product shares keyed by mix node."""
        self._check_fitted()
        return product_bcc(self.graph_, self.solution_, attribute=self.attributes[-1])

    def score(self, X=None, y=None) -> float:
        """Negative total slack: 0 for a perfectly consistent chain."""
        self._check_fitted()
        return -self.total_slack_

    def _check_fitted(self) -> None:
        if not hasattr(self, "solution_"):
            raise RuntimeError("AttributeTracer is not fitted; call fit(graph, inlets)")
