"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one PASS/FAIL line so a plain `pytest -s tests/test_acceptance.py`
reads as a checklist.
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from carat.atombill import derive_phi, derive_psi
from carat.attribution import build_lp, fixed_point_oracle, solve
from carat.cli import main as carat_main
from carat.estimator import AttributeTracer
from carat.graph import MixNodeId, ProductionNodeId, load_inlets
from carat.io import load_tables, read_records
from carat.mapping import FileMappingProvider

from chain_builders import (
    bump_inlet,
    constraint_dependencies,
    has_dependency_cycle,
    one_node_system,
    random_consistent_chain,
)
from conftest import copy_fixture

CO = "[C-]#[O+]"
TDA = "Cc1ccc(N)cc1N"
TDI = "Cc1ccc(N=C=O)cc1N=C=O"


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"FAIL  {name}")
        raise
    print(f"PASS  {name}")


def load_fixture(folder, inlet="inlet.csv"):
    graph, inlets = load_tables(
        folder / "bom.csv", folder / "bos.csv", folder / "mix.csv", folder / inlet
    )
    return graph, inlets, FileMappingProvider(folder / "mapped.csv")


def test_one_node_worked_example():
    with criterion("one-node worked example: psi 2/99 and 20/99, TDI biogenic 20/99, < 1 s"):
        started = time.perf_counter()
        graph, psi, inlets = one_node_system()
        node = ProductionNodeId("COMP1", "PLNT1", "MAT3")
        bill = psi[node]
        assert bill.share("MAT1", CO, "MAT3", TDI, "C") == pytest.approx(2 / 99, abs=1e-9)
        assert bill.share("MAT2", CO, "MAT3", TDI, "C") == pytest.approx(20 / 99, abs=1e-9)
        solution = solve(build_lp(graph, psi, inlets))
        assert solution.beta(node, TDI, "C", "biogenic") == pytest.approx(20 / 99, abs=1e-9)
        assert time.perf_counter() - started < 1.0


def test_base_case_all_fossil(tmp_path):
    with criterion("base case: 27-node chain, every biogenic share 0, slack < 1e-6, < 5 s"):
        started = time.perf_counter()
        folder = copy_fixture("tdi", tmp_path)
        graph, inlets, mapper = load_fixture(folder)
        assert len(graph.mix_nodes) + len(graph.production_nodes) == 27
        tracer = AttributeTracer(mapper=mapper).fit(graph, inlets)
        assert tracer.total_slack_ < 1e-6
        for (key, value) in tracer.solution_.production_beta.items():
            if key[-1] == "biogenic":
                assert value == pytest.approx(0.0, abs=1e-9)
        for (key, value) in {
            **tracer.solution_.mix_beta,
            **tracer.solution_.inlet_beta,
        }.items():
            if key[-1] == "biogenic":
                assert value == pytest.approx(0.0, abs=1e-9)
        assert time.perf_counter() - started < 5.0


def test_case1_biogenic_natural_gas(tmp_path):
    with criterion("case 1: biogenic natural gas gives TDI 2/9 and CO-derived shares 1.0"):
        folder = copy_fixture("tdi", tmp_path)
        graph, inlets, mapper = load_fixture(folder, "inlet_case1.csv")
        tracer = AttributeTracer(mapper=mapper).fit(graph, inlets)
        assert tracer.total_slack_ < 1e-6
        solution = tracer.solution_
        assert solution.beta(
            MixNodeId("COMP2", "PROD29"), TDI, "C", "biogenic"
        ) == pytest.approx(2 / 9, abs=1e-9)
        assert solution.beta(
            ProductionNodeId("COMP2", "PLNT11", "PROD29"), TDI, "C", "biogenic"
        ) == pytest.approx(2 / 9, abs=1e-9)
        co_derived_prod = [
            value
            for (node, material, smiles, element, attr), value in solution.production_beta.items()
            if attr == "biogenic" and smiles in (CO, "O=C=O")
        ]
        co_derived_mix = [
            value
            for (node, smiles, element, attr), value in solution.mix_beta.items()
            if attr == "biogenic" and smiles in (CO, "O=C=O")
        ]
        assert co_derived_prod and co_derived_mix
        for value in co_derived_prod + co_derived_mix:
            assert value == pytest.approx(1.0, abs=1e-9)


def test_case2_recycle_chain(tmp_path):
    with criterion("case 2: recycle loop solves, butanediol biogenic 0.375"):
        folder = copy_fixture("bdo", tmp_path)
        graph, inlets, mapper = load_fixture(folder)
        from carat.reports import scenario_override

        case2 = scenario_override(
            graph,
            inlets,
            [
                (MixNodeId("COMP3", "ACET"), "C#C", "biogenic", 0.75),
                (MixNodeId("COMP3", "RBDO"), "OCCCCO", "biogenic", 0.5),
            ],
        )
        tracer = AttributeTracer(mapper=mapper).fit(graph, case2)
        assert has_dependency_cycle(constraint_dependencies(tracer.graph_, tracer.psi_))
        assert tracer.status_ == "optimal"
        assert tracer.total_slack_ < 1e-6
        assert tracer.solution_.beta(
            MixNodeId("COMP3", "BDOMAT"), "OCCCCO", "C", "biogenic"
        ) == pytest.approx(0.375, abs=1e-6)


def test_oracle_equivalence_on_50_random_fixtures():
    with criterion("oracle equivalence: 50 random consistent chains (>= 10 cyclic), |LP - Jacobi| < 1e-8"):
        cyclic_count = 0
        for seed in range(50):
            force = seed >= 38
            graph, psi, inlets, cyclic = random_consistent_chain(seed, force_cycle=force)
            if cyclic:
                cyclic_count += 1
            solution = solve(build_lp(graph, psi, inlets))
            oracle = fixed_point_oracle(graph, psi, inlets)
            assert oracle.converged, f"oracle did not converge on seed {seed}"
            for key, value in solution.production_beta.items():
                assert value == pytest.approx(oracle.production_beta[key], abs=1e-8), (
                    seed,
                    key,
                )
            for key, value in solution.mix_beta.items():
                assert value == pytest.approx(oracle.mix_beta[key], abs=1e-8), (seed, key)
        assert cyclic_count >= 10


def test_phi_extraction_exact_rationals():
    with criterion("atom-bill extraction: reference node rows as exact rationals 7/9, 2/9, 1, 1/2"):
        tdi_mapped = (
            "[CH3:1][c:2]1[cH:3][cH:4][c:5]([NH2:6])[cH:7][c:8]1[NH2:9]"
            ".[C-:10]#[O+:11].[C-:12]#[O+:13]"
            ">>[CH3:1][c:2]1[cH:3][cH:4][c:5]([N:6]=[C:10]=[O:11])[cH:7][c:8]1[N:9]=[C:12]=[O:13]"
        )
        co2_mapped = "[C-:1]#[O+:2].[OH2:3]>>[O:2]=[C:1]=[O:3]"
        co_identity = "[C-:1]#[O+:2]>>[C-:1]#[O+:2]"
        n2_mapped = "[CH3:1][c:2]1[cH:3][cH:4][c:5]([NH2:6])[cH:7][c:8]1[NH2:9]>>[N:6]#[N:9]"
        hcl_mapped = "[Cl:1][Cl:2]>>[ClH:1]"
        phi = derive_phi(
            [tdi_mapped, co2_mapped, co_identity, n2_mapped, hcl_mapped],
            elements=("C", "H", "N", "O"),
        )

        def exact(reactant, product, element):
            rows = [
                r
                for r in phi.rows
                if r.reactant_smiles == reactant
                and r.product_smiles == product
                and r.element == element
            ]
            assert len(rows) == 1, (reactant, product, element)
            return Fraction(rows[0].atom_count, rows[0].total_atoms)

        assert exact(TDA, TDI, "C") == Fraction(7, 9)
        assert exact(CO, TDI, "C") == Fraction(2, 9)
        assert exact(TDA, TDI, "H") == Fraction(1)
        assert exact(TDA, TDI, "N") == Fraction(1)
        assert exact(CO, TDI, "O") == Fraction(1)
        assert exact(CO, "O=C=O", "C") == Fraction(1)
        assert exact(CO, "O=C=O", "O") == Fraction(1, 2)
        assert exact("O", "O=C=O", "O") == Fraction(1, 2)
        assert exact(CO, CO, "C") == Fraction(1)
        assert exact(CO, CO, "O") == Fraction(1)
        assert exact(TDA, "N#N", "N") == Fraction(1)
        assert exact("ClCl", "Cl", "H") == Fraction(1)


def test_monotonicity_across_20_random_fixtures():
    with criterion("monotonicity: +0.1 biogenic at any single inlet never lowers any share"):
        for seed in range(100, 120):
            graph, psi, inlets, _ = random_consistent_chain(seed)
            base = solve(build_lp(graph, psi, inlets))
            for row in inlets:
                if row.attribute != "biogenic" or row.share > 0.9:
                    continue
                bumped = bump_inlet(inlets, row.mix, row.smiles, 0.1)
                higher = solve(build_lp(graph, psi, bumped))
                for key, value in base.production_beta.items():
                    if key[-1] == "biogenic":
                        assert higher.production_beta[key] >= value - 1e-9, (seed, key)
                for key, value in base.mix_beta.items():
                    if key[-1] == "biogenic":
                        assert higher.mix_beta[key] >= value - 1e-9, (seed, key)


def test_trace_determinism(tmp_path, capsys):
    with criterion("determinism: consecutive trace runs produce byte-identical beta.csv and sankey.json"):
        folder = copy_fixture("tdi", tmp_path)
        args = [
            "trace",
            "--bom", str(folder / "bom.csv"),
            "--bos", str(folder / "bos.csv"),
            "--mix", str(folder / "mix.csv"),
            "--inlet", str(folder / "inlet_case1.csv"),
            "--mapper", f"file:{folder / 'mapped.csv'}",
        ]
        assert carat_main(args + ["--out", str(tmp_path / "run1")]) == 0
        assert carat_main(args + ["--out", str(tmp_path / "run2")]) == 0
        capsys.readouterr()
        for name in ("beta.csv", "sankey.json"):
            first = (tmp_path / "run1" / name).read_bytes()
            second = (tmp_path / "run2" / name).read_bytes()
            assert first == second, name
