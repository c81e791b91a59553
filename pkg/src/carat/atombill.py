"""From a node's bill of substances to its bills of atoms.

Pipeline per production node: estimate mole quantities, construct one
single-product reaction SMILES per tracked product substance, hand those to
an atom-mapping provider, then read the mapped strings back into the
substance-level atom bill (phi) and split it across source materials into
the material-level atom bill (psi).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .diagnostics import Diagnostic
from .graph import BillOfSubstances, aggregate_substances
from .reactions import Reaction, atom_correspondence, parse_reaction
from .smiles import SmilesError, molar_mass, parse_molecule, unmapped_form

DEFAULT_ELEMENTS = ("C",)
DEFAULT_MULTIPLICITY_CAP = 6
DEFAULT_TOKEN_LIMIT = 512


class AtomBillError(ValueError):
    pass


class TokenBudgetError(AtomBillError):
    """Constructed reaction SMILES exceeds the mapping provider's token budget."""


@dataclass(frozen=True)
class MoleTable:
    """kmol of each substance per kg of main output, per reaction role."""

    reactants: dict[str, float]
    products: dict[str, float]

    def of(self, role: str, smiles: str) -> float:
        table = self.reactants if role == "reactant" else self.products
        return table.get(smiles, 0.0)


def compute_moles(bill: BillOfSubstances) -> MoleTable:
    """n_s = (1/M_s) * sum_p alpha_p * lambda_ps, aggregated per role."""
    tables: dict[str, dict[str, float]] = {}
    for role in ("reactant", "product"):
        totals = aggregate_substances(bill, role)
        moles: dict[str, float] = {}
        for smiles, mass in totals.items():
            try:
                mol = parse_molecule(smiles)
            except SmilesError as exc:
                raise AtomBillError(f"{bill.node}: unparseable {role} SMILES {smiles!r}: {exc}")
            moles[smiles] = mass / molar_mass(mol)
        tables[role] = moles
    return MoleTable(reactants=tables["reactant"], products=tables["product"])


@dataclass(frozen=True)
class ReactionPlan:
    """One constructed reaction string plus the provenance of its components."""

    node: object
    product_smiles: str
    text: str
    multiplicities: dict[str, int]
    components: tuple[str, ...]  # source substance per reactant molecule component
    token_count: int


def _count_tokens(text: str) -> int:
    from .smiles import _tokenize

    total = 0
    for part in text.replace(">>", ">.>").split(">"):
        for comp in part.split("."):
            if not comp:
                continue
            total += sum(1 for _ in _tokenize(comp))
    return total + 2


def build_reaction_smiles(
    bill: BillOfSubstances,
    moles: MoleTable,
    *,
    elements: Sequence[str] = DEFAULT_ELEMENTS,
    multiplicity_cap: int = DEFAULT_MULTIPLICITY_CAP,
    token_limit: int = DEFAULT_TOKEN_LIMIT,
) -> list[ReactionPlan]:
    """One reaction string per product substance containing a tracked element.

    All reactant substances appear on the left with stoichiometric
    multiplicity round(n_reactant / n_product) clamped to [1, cap]; the
    reagent section stays empty; exactly one product substance on the right.
    """
    reactant_order = list(moles.reactants)
    if not reactant_order:
        raise AtomBillError(f"{bill.node}: no reactant substances in the bill")

    plans: list[ReactionPlan] = []
    for product, n_p in moles.products.items():
        mol = parse_molecule(product)
        if not any(mol.count(e) > 0 for e in elements):
            continue
        if n_p <= 0:
            raise AtomBillError(f"{bill.node}: nonpositive mole quantity for {product!r}")
        mults: dict[str, int] = {}
        components: list[str] = []
        parts: list[str] = []
        for reactant in reactant_order:
            ratio = moles.reactants[reactant] / n_p
            mult = min(max(round(ratio), 1), multiplicity_cap)
            mults[reactant] = mult
            fragments = reactant.count(".") + 1
            for _ in range(mult):
                parts.append(reactant)
                components.extend([reactant] * fragments)
        text = f"{'.'.join(parts)}>>{product}"
        tokens = _count_tokens(text)
        if tokens > token_limit:
            raise TokenBudgetError(
                f"{bill.node}: reaction for product {product!r} needs {tokens} tokens, "
                f"provider limit is {token_limit}"
            )
        plans.append(
            ReactionPlan(
                node=bill.node,
                product_smiles=product,
                text=text,
                multiplicities=mults,
                components=tuple(components),
                token_count=tokens,
            )
        )
    return plans


@dataclass(frozen=True)
class PhiRow:
    reactant_smiles: str
    product_smiles: str
    element: str
    atom_count: int
    total_atoms: int

    @property
    def share(self) -> float:
        return self.atom_count / self.total_atoms


@dataclass(frozen=True)
class SubstanceAtomBill:
    rows: tuple[PhiRow, ...]
    diagnostics: tuple[Diagnostic, ...] = ()

    def rows_for(self, product_smiles: str, element: str) -> list[PhiRow]:
        return [
            r
            for r in self.rows
            if r.product_smiles == product_smiles and r.element == element
        ]

    def share(self, reactant_smiles: str, product_smiles: str, element: str) -> float:
        return sum(
            r.share
            for r in self.rows
            if r.reactant_smiles == reactant_smiles
            and r.product_smiles == product_smiles
            and r.element == element
        )

    def row_sum(self, product_smiles: str, element: str) -> float:
        return sum(r.share for r in self.rows_for(product_smiles, element))


def derive_phi(
    mapped_reactions: Sequence[Reaction | str],
    elements: Sequence[str] = DEFAULT_ELEMENTS,
    plans: Optional[Sequence[ReactionPlan]] = None,
) -> SubstanceAtomBill:
    """Substance-level atom bill from mapped reactions.

    When reaction plans are supplied, reactant components are pooled back to
    their source substances (multi-fragment substances, repeated molecules);
    otherwise each component's map-stripped text stands for its substance.
    """
    if plans is not None and len(plans) != len(mapped_reactions):
        raise AtomBillError("one reaction plan required per mapped reaction")

    rows: list[PhiRow] = []
    diagnostics: list[Diagnostic] = []

    for idx, item in enumerate(mapped_reactions):
        reaction = parse_reaction(item) if isinstance(item, str) else item
        if not reaction.mapped:
            raise AtomBillError(f"reaction {idx} carries no atom maps: {reaction.text!r}")
        plan = plans[idx] if plans is not None else None

        if plan is not None:
            if len(plan.components) != len(reaction.reactants):
                raise AtomBillError(
                    f"reaction {idx}: mapped string has {len(reaction.reactants)} reactant "
                    f"components, plan expected {len(plan.components)}"
                )
            component_substance = list(plan.components)
            product_smiles = plan.product_smiles
        else:
            component_substance = [unmapped_form(m) for m in reaction.reactants]
            if len(reaction.products) != 1:
                raise AtomBillError(
                    f"reaction {idx}: expected a single product substance, "
                    f"got {len(reaction.products)} components"
                )
            product_smiles = unmapped_form(reaction.products[0])

        diagnostics.extend(reaction.diagnostics)

        for element in elements:
            total = sum(m.element_counts.get(element, 0) for m in reaction.products)
            if total == 0:
                continue
            links, unattributed = atom_correspondence(reaction, element)
            counts: dict[str, int] = {}
            for link in links:
                substance = component_substance[link.reactant_index]
                counts[substance] = counts.get(substance, 0) + 1
            supply: dict[str, int] = {}
            for idx_r, mol in enumerate(reaction.reactants):
                substance = component_substance[idx_r]
                supply[substance] = supply.get(substance, 0) + mol.element_counts.get(element, 0)
            for substance, count in counts.items():
                if count > supply.get(substance, 0):
                    diagnostics.append(
                        Diagnostic(
                            "warning",
                            "element-conservation",
                            f"{product_smiles} [{element}]: {count} atoms attributed to "
                            f"{substance}, which only supplies {supply.get(substance, 0)}",
                        )
                    )
                rows.append(
                    PhiRow(
                        reactant_smiles=substance,
                        product_smiles=product_smiles,
                        element=element,
                        atom_count=count,
                        total_atoms=total,
                    )
                )
            if unattributed:
                diagnostics.append(
                    Diagnostic(
                        "warning",
                        "unattributed-atoms",
                        f"{product_smiles} [{element}]: {len(unattributed)} of {total} "
                        "product atoms have no reactant origin",
                    )
                )

    return SubstanceAtomBill(rows=tuple(rows), diagnostics=tuple(diagnostics))


@dataclass(frozen=True)
class PsiRow:
    reactant_material: str
    reactant_smiles: str
    product_material: str
    product_smiles: str
    element: str
    share: float
    atom_count: int


@dataclass(frozen=True)
class MaterialAtomBill:
    node: object
    rows: tuple[PsiRow, ...]
    diagnostics: tuple[Diagnostic, ...] = ()

    def by_product(self, material: str, smiles: str, element: str) -> list[PsiRow]:
        return [
            r
            for r in self.rows
            if r.product_material == material
            and r.product_smiles == smiles
            and r.element == element
        ]

    def share(
        self,
        reactant_material: str,
        reactant_smiles: str,
        product_material: str,
        product_smiles: str,
        element: str,
    ) -> float:
        return sum(
            r.share
            for r in self.rows
            if r.reactant_material == reactant_material
            and r.reactant_smiles == reactant_smiles
            and r.product_material == product_material
            and r.product_smiles == product_smiles
            and r.element == element
        )


def derive_psi(phi: SubstanceAtomBill, bill: BillOfSubstances) -> MaterialAtomBill:
    """Split each substance-level share across source materials in proportion
    to their mass contribution alpha * lambda."""
    rows: list[PsiRow] = []
    diagnostics: list[Diagnostic] = list(phi.diagnostics)

    product_materials: dict[str, list[str]] = {}
    for row in bill.rows:
        if row.role == "product":
            product_materials.setdefault(row.smiles, [])
            if row.material not in product_materials[row.smiles]:
                product_materials[row.smiles].append(row.material)

    for phi_row in phi.rows:
        weights: dict[str, float] = {}
        for material in bill.materials("reactant"):
            lam = bill.lam("reactant", material, phi_row.reactant_smiles)
            if lam > 0:
                weights[material] = bill.ratio("reactant", material) * lam
        total_weight = sum(weights.values())
        if total_weight <= 0:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "phi-substance-not-in-bill",
                    f"{bill.node}: {phi_row.reactant_smiles} appears in the atom bill "
                    "but not among the node's reactants",
                )
            )
            continue
        targets = product_materials.get(phi_row.product_smiles)
        if not targets:
            diagnostics.append(
                Diagnostic(
                    "warning",
                    "phi-product-not-in-bill",
                    f"{bill.node}: {phi_row.product_smiles} appears in the atom bill "
                    "but not among the node's products",
                )
            )
            continue
        for product_material in targets:
            for material, weight in weights.items():
                rows.append(
                    PsiRow(
                        reactant_material=material,
                        reactant_smiles=phi_row.reactant_smiles,
                        product_material=product_material,
                        product_smiles=phi_row.product_smiles,
                        element=phi_row.element,
                        share=weight / total_weight * phi_row.share,
                        atom_count=phi_row.atom_count,
                    )
                )

    return MaterialAtomBill(node=bill.node, rows=tuple(rows), diagnostics=tuple(diagnostics))


def boa_records(psi: MaterialAtomBill) -> list[dict]:
    """Rows for boa.csv: the material-level bill of atoms with counts."""
    return [
        {
            "reactant_material": r.reactant_material,
            "reactant_smiles": r.reactant_smiles,
            "product_material": r.product_material,
            "product_smiles": r.product_smiles,
            "element": r.element,
            "atom_count": str(r.atom_count),
            "atom_share": repr(round(r.share, 12)),
        }
        for r in psi.rows
    ]
