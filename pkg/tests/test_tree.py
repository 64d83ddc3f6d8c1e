import random

import pytest

from composekit import tree as tree_mod
from composekit.errors import ClassificationError, ConfigSyntaxError, MissingSimulationUnit, NonApiFileAtRoot, ScanError
from composekit.tree import (
    NodeKind,
    classification_listing,
    discover_api,
    list_simulations,
    scan_tree,
)

from conftest import CLEAN


def test_particles_main_passive_classification(clean_tree):
    assert clean_tree["Particles"].kind is NodeKind.UNIT_ROOT
    assert clean_tree["Particles/ParticlesMain"].kind is NodeKind.SUBUNIT
    assert clean_tree["Particles/ParticlesMain/passive"].kind is NodeKind.IMPLEMENTATION
    assert clean_tree["Particles/ParticlesMain/unitTest"].kind is NodeKind.UNIT_TEST
    assert clean_tree["Simulation"].kind is NodeKind.SIMULATION_CONTAINER
    assert clean_tree["Simulation/unitTest"].kind is NodeKind.SIMULATION_CONTAINER
    assert clean_tree["Simulation/Sedov"].kind is NodeKind.SIMULATION_SETUP


def test_only_simulation(make_tree):
    t = scan_tree(make_tree({}))
    assert list(t.nodes) == ["Simulation"]
    assert t["Simulation"].kind is NodeKind.SIMULATION_CONTAINER
    assert t.units == []
    assert list_simulations(t) == []


def test_golden_classification(clean_tree, golden):
    golden("clean_classification.txt", classification_listing(clean_tree))


def test_classification_counts(clean_tree):
    kinds = [n.kind for n in clean_tree.nodes.values()]
    assert kinds.count(NodeKind.UNIT_ROOT) == 7
    assert kinds.count(NodeKind.SIMULATION_SETUP) == 4
    assert sum(1 for _ in clean_tree.sources()) == 101  # find tests/fixtures/clean -name "*.F90" | wc -l


def test_nested_implementations(make_tree):
    t = scan_tree(make_tree({"U/UMain/impl1/deeper/": "", "U/UMain/impl2/": ""}))
    assert t["U/UMain/impl1/deeper"].kind is NodeKind.IMPLEMENTATION
    assert t.impl_group("U/UMain") == ["impl1", "impl2"]


@pytest.mark.parametrize(
    "bad",
    [
        "Particles/Helpers/",  # mixed case, not a subunit
        "Particles/ParticlesMain/ParticlesDeep/",  # subunits only directly under the unit
        "lowercase/",  # top-level implementation dir
        "Particles/Particles/",  # subunit needs a suffix
        "Simulation/Sedov/sub/",  # setups do not nest
        "Particles/ParticlesMain/unitTest/x/",
    ],
)
def test_classification_errors(make_tree, bad):
    root = make_tree({"Simulation/Sedov/Config": "", bad: ""})
    with pytest.raises(ClassificationError) as exc:
        scan_tree(root)
    assert exc.value.path == bad.rstrip("/")


def test_missing_simulation(tmp_path):
    (tmp_path / "Grid").mkdir()
    with pytest.raises(MissingSimulationUnit):
        scan_tree(tmp_path)


def test_config_errors_carry_paths(make_tree):
    root = make_tree({"Grid/GridMain/Config": "REQUIRES Driver\nBOGUS\n"})
    with pytest.raises(ConfigSyntaxError) as exc:
        scan_tree(root)
    assert (exc.value.path, exc.value.line) == ("Grid/GridMain/Config", 2)


def test_duplicate_routine_in_directory(make_tree):
    root = make_tree({"Grid/Grid_init.F90": None, "Grid/Grid_init.f90": None})
    with pytest.raises(ScanError):
        scan_tree(root, src_exts=(".F90", ".f90"))


def test_source_extension_allow_list(make_tree):
    root = make_tree({"Grid/Grid_init.F90": None, "Grid/Grid_init.c": None, "Grid/Makefile": "x"})
    assert [s.routine for s in scan_tree(root)["Grid"].sources] == ["Grid_init"]
    assert [s.path for s in scan_tree(root, src_exts=["c"])["Grid"].sources] == ["Grid/Grid_init.c"]


def test_doc_header_and_data_lines(make_tree):
    root = make_tree({
        "Grid/GridMain/a.F90": "\n\n  !!****f* Grid/a\n!!DATA Grid_data\n!!DATA GridMain_data Other_data\n",
        "Grid/GridMain/b.F90": "! plain comment\n!!****\n",
    })
    srcs = {s.routine: s for s in scan_tree(root)["Grid/GridMain"].sources}
    assert srcs["a"].has_doc_header and srcs["a"].data_uses == ("Grid_data", "GridMain_data", "Other_data")
    assert not srcs["b"].has_doc_header and srcs["b"].data_uses == ()


def test_hidden_and_symlinked_dirs_are_skipped(make_tree):
    root = make_tree({".git/HEAD": "x", "Grid/Grid_init.F90": None})
    (root / "Alias").symlink_to(root / "Grid")
    t = scan_tree(root)
    assert sorted(t.nodes) == ["Grid", "Simulation"]


def test_discover_api_example(make_tree):
    root = make_tree({"Particles/Particles_advance.F90": None, "Particles/Particles_init.F90": None})
    api = discover_api(scan_tree(root), "Particles")
    assert [(a.name, a.stub_path) for a in api] == [
        ("Particles_advance", "Particles/Particles_advance.F90"),
        ("Particles_init", "Particles/Particles_init.F90"),
    ]


def test_discover_api_empty_unit(make_tree):
    root = make_tree({"Org/OrgMain/": ""})
    assert discover_api(scan_tree(root), "Org") == []


def test_non_api_file_at_root(make_tree):
    root = make_tree({"Grid/gr_helper.F90": None})
    with pytest.raises(NonApiFileAtRoot) as exc:
        discover_api(scan_tree(root), "Grid")
    assert exc.value.path == "Grid/gr_helper.F90"


def test_golden_grid_api(clean_tree, golden):
    golden("grid_api.txt", "".join(f"{a.name} {a.stub_path}\n" for a in discover_api(clean_tree, "Grid")))


def test_api_prefix_law(clean_tree, seeded_tree):
    for t in (clean_tree, seeded_tree):
        for unit in t.units:
            for api in discover_api(t, unit):
                assert api.name.startswith(unit + "_") and api.unit == unit


def test_list_simulations(make_tree):
    root = make_tree({"Simulation/Sedov/Config": "", "Simulation/unitTest/ParticlesMove/Config": ""})
    assert list_simulations(scan_tree(root)) == ["Sedov", "unitTest/ParticlesMove"]


def test_golden_simulations(clean_tree, golden):
    golden("clean_simulations.txt", "".join(s + "\n" for s in list_simulations(clean_tree)))


def test_scans_are_equal_and_order_independent(monkeypatch, tmp_path):
    import shutil

    first = scan_tree(CLEAN)
    copy = tmp_path / "copy"
    shutil.copytree(CLEAN, copy)
    assert scan_tree(copy) == first  # root path is not part of equality

    real = tree_mod._list_dir
    rng = random.Random(7)

    def shuffled(path):
        entries = real(path)
        rng.shuffle(entries)
        return entries

    monkeypatch.setattr(tree_mod, "_list_dir", shuffled)
    for _ in range(3):
        assert scan_tree(CLEAN) == first


def test_node_paths_form_a_tree(clean_tree):
    for path, node in clean_tree.nodes.items():
        if node.parent:
            assert node.parent in clean_tree
            assert node.name in clean_tree[node.parent].children
        if node.kind is NodeKind.UNIT_ROOT:
            assert node.depth == 1
        if node.kind is NodeKind.SUBUNIT:
            assert node.name.startswith(node.unit)
        if node.kind is NodeKind.IMPLEMENTATION:
            assert node.name == node.name.lower()
        assert list(node.children) == sorted(node.children)


def _tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_fixture_generator_matches_committed_trees(tmp_path):
    import importlib.util

    spec = importlib.util.spec_from_file_location("build_fixtures", CLEAN.parent / "build_fixtures.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(tmp_path)
    for name in ("clean", "seeded"):
        assert _tree_bytes(tmp_path / name) == _tree_bytes(CLEAN.parent / name)
