"""carat: elemental attribute tracking across chemical value chains.

Parse substance and atom-mapped reaction SMILES, represent a value chain as
a bipartite mix/production graph, derive bills of atoms from atom mappings,
and solve a slack-minimizing LP for per-substance attribute shares such as
biogenic carbon content.
"""

from .atombill import (
    MoleTable,
    ReactionPlan,
    build_reaction_smiles,
    compute_moles,
    derive_phi,
    derive_psi,
)
from .attribution import (
    AttributeLP,
    AttributeSolution,
    build_lp,
    fixed_point_oracle,
    slack_report,
    solve,
)
from .diagnostics import Diagnostic
from .estimator import AttributeTracer, check_inlets, check_value_chain
from .graph import (
    BillOfSubstances,
    InletAttributeTable,
    MixNodeId,
    ProductionNodeId,
    ValueChainGraph,
    aggregate_substances,
    apply_threshold,
    inlet_nodes,
    load_graph,
    load_inlets,
    validate,
)
from .mapping import (
    CachedMappingProvider,
    FileMappingProvider,
    HttpMappingProvider,
    MappingError,
    provider_from_spec,
)
from .reactions import Reaction, atom_correspondence, parse_reaction
from .reports import product_bcc, scenario_override
from .sankey import SankeyDocument, emit_sankey, write_sankey
from .smiles import Molecule, SmilesError, molar_mass, parse_molecule

__version__ = "0.1.0"

__all__ = [
    "AttributeLP",
    "AttributeSolution",
    "AttributeTracer",
    "BillOfSubstances",
    "CachedMappingProvider",
    "Diagnostic",
    "FileMappingProvider",
    "HttpMappingProvider",
    "InletAttributeTable",
    "MappingError",
    "MixNodeId",
    "Molecule",
    "MoleTable",
    "ProductionNodeId",
    "Reaction",
    "ReactionPlan",
    "SankeyDocument",
    "SmilesError",
    "ValueChainGraph",
    "aggregate_substances",
    "apply_threshold",
    "atom_correspondence",
    "build_lp",
    "build_reaction_smiles",
    "check_inlets",
    "check_value_chain",
    "compute_moles",
    "derive_phi",
    "derive_psi",
    "emit_sankey",
    "fixed_point_oracle",
    "inlet_nodes",
    "load_graph",
    "load_inlets",
    "molar_mass",
    "parse_molecule",
    "parse_reaction",
    "product_bcc",
    "provider_from_spec",
    "scenario_override",
    "slack_report",
    "solve",
    "validate",
    "write_sankey",
]
