from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

TDI_SMILES = "Cc1ccc(N=C=O)cc1N=C=O"
TDA_SMILES = "Cc1ccc(N)cc1N"
CO_SMILES = "[C-]#[O+]"


def tdi_node_bom_records():
    """Bill of materials for the phosgenation node t:COMP2|PLNT11|PROD29."""
    rows = [
        ("reactant", "PROD31", 0.53),
        ("reactant", "PROD19", 0.04),
        ("reactant", "PROD6", 0.46),
        ("reactant", "PROD10", 0.52),
        ("product", "PROD36", 0.63),
        ("product", "PROD29", 1.16),
    ]
    return [
        {
            "node_c": "COMP2",
            "node_b": "PLNT11",
            "node_g": "PROD29",
            "role": role,
            "material": material,
            "ratio": str(ratio),
        }
        for role, material, ratio in rows
    ]


def tdi_node_bos_records():
    """Bill of substances for the phosgenation node t:COMP2|PLNT11|PROD29."""
    rows = [
        ("product", "PROD29", TDI_SMILES, 1.16),
        ("product", "PROD36", "Cl", 0.56),
        ("product", "PROD36", "O=C=O", 0.02),
        ("product", "PROD36", CO_SMILES, 0.02),
        ("product", "PROD36", "N#N", 0.03),
        ("reactant", "PROD10", CO_SMILES, 0.52),
        ("reactant", "PROD6", "ClCl", 0.46),
        ("reactant", "PROD19", "[Na+].[OH-]", 0.02),
        ("reactant", "PROD19", "O", 0.02),
        ("reactant", "PROD31", TDA_SMILES, 0.53),
    ]
    return [
        {
            "node_c": "COMP2",
            "node_b": "PLNT11",
            "node_g": "PROD29",
            "role": role,
            "material": material,
            "smiles": smiles,
            "ratio": str(ratio),
        }
        for role, material, smiles, ratio in rows
    ]


def one_node_records():
    """Worked single-node example: two impure inlet materials feeding one
    phosgenation step (material 1: 80% TDA / 20% CO, material 2: pure CO)."""
    bom = [
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "reactant",
            "material": "MAT1",
            "ratio": repr(1 / 3),
        },
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "reactant",
            "material": "MAT2",
            "ratio": repr(2 / 3),
        },
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "product",
            "material": "MAT3",
            "ratio": "2.28",
        },
    ]
    bos = [
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "reactant",
            "material": "MAT1",
            "smiles": TDA_SMILES,
            "ratio": repr(0.8 / 3),
        },
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "reactant",
            "material": "MAT1",
            "smiles": CO_SMILES,
            "ratio": repr(0.2 / 3),
        },
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "reactant",
            "material": "MAT2",
            "smiles": CO_SMILES,
            "ratio": repr(2 / 3),
        },
        {
            "node_c": "COMP1",
            "node_b": "PLNT1",
            "node_g": "MAT3",
            "role": "product",
            "material": "MAT3",
            "smiles": TDI_SMILES,
            "ratio": "2.28",
        },
    ]
    return bom, bos


def one_node_inlet_records(bio_material2: float = 1.0):
    rows = []
    for mix_p, smiles, bio in [
        ("MAT1", TDA_SMILES, 0.0),
        ("MAT1", CO_SMILES, 0.0),
        ("MAT2", CO_SMILES, bio_material2),
    ]:
        for attribute, share in (("fossil", 1.0 - bio), ("biogenic", bio)):
            rows.append(
                {
                    "mix_c": "COMP1",
                    "mix_p": mix_p,
                    "smiles": smiles,
                    "element": "C",
                    "attribute": attribute,
                    "share": repr(share),
                }
            )
    return rows


@pytest.fixture
def tdi_fixture_dir():
    return FIXTURES / "tdi"


@pytest.fixture
def bdo_fixture_dir():
    return FIXTURES / "bdo"


def copy_fixture(name: str, destination: Path) -> Path:
    """Copy a fixture directory into a scratch area; CLI runs write a
    mapping cache next to their inputs, so tests never run in-repo."""
    import shutil

    target = destination / name
    shutil.copytree(FIXTURES / name, target)
    return target
