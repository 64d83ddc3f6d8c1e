import shutil
from pathlib import Path

import pytest

from composekit.errors import BaselineAbsent, HarnessError, MissingFixture
from composekit.harness import TestCase, discover_unit_tests, load_suite, parse_suite, run_case, run_suite

from conftest import FIXTURES

SUITE = FIXTURES / "suite.txt"
PASSIVE_CASES = {"sedov", "sedov_no_monitor", "sedov_io", "particles_all", "ut_particles_move", "ut_particles_advance"}


@pytest.fixture
def workspace(tmp_path):
    """A private copy of the suite, its baselines and the fixture trees."""
    for name in ("clean", "seeded", "baselines"):
        shutil.copytree(FIXTURES / name, tmp_path / name)
    shutil.copy(SUITE, tmp_path / "suite.txt")
    return tmp_path


def _snapshot(d: Path) -> dict[str, tuple[bytes, int]]:
    return {p.name: (p.read_bytes(), p.stat().st_mtime_ns) for p in sorted(d.iterdir())}


def test_committed_baselines_pass():
    report = run_suite(load_suite(SUITE), "check")
    assert report.passed, report.to_text()
    assert len(report.results) == 12


def test_record_then_check(workspace):
    shutil.rmtree(workspace / "baselines")
    spec = load_suite(workspace / "suite.txt")
    with pytest.raises(BaselineAbsent):
        run_suite(spec, "check")
    assert run_suite(spec, "record").passed
    assert run_suite(spec, "check").passed
    # recording reproduces the committed baselines byte for byte
    for p in (FIXTURES / "baselines").iterdir():
        assert (workspace / "baselines" / p.name).read_bytes() == p.read_bytes()


def test_mutation_fails_exactly_the_cases_that_use_it(workspace):
    (workspace / "clean/Particles/ParticlesMain/passive/Config").write_text("PARAMETER pt_dtFactor REAL 0.3\n")
    report = run_suite(load_suite(workspace / "suite.txt"), "check")
    assert set(report.failed) == PASSIVE_CASES
    for r in report.results:
        if r.name not in PASSIVE_CASES:
            continue
        changed = [line for line in r.diff.splitlines() if line[:1] in "+-" and line[:3] not in ("+++", "---")]
        assert changed == [
            "-PARAM pt_dtFactor REAL 0.25 Particles/ParticlesMain=0.5 Particles/ParticlesMain/passive=0.25",
            "+PARAM pt_dtFactor REAL 0.3 Particles/ParticlesMain=0.5 Particles/ParticlesMain/passive=0.3",
        ]


def test_report_change_is_detected(workspace):
    (workspace / "baselines/list_clean.report").write_text("Sedov\n")
    report = run_suite(load_suite(workspace / "suite.txt"), "check")
    assert report.failed == ["list_clean"]
    assert "-Sedov" not in report.to_text()
    assert "+ParticlesAll" in report.to_text()


def test_wrong_exit_status_fails(workspace):
    text = (workspace / "suite.txt").read_text().replace("validate :: 1", "validate :: 0")
    (workspace / "suite.txt").write_text(text)
    report = run_suite(load_suite(workspace / "suite.txt"), "check")
    assert report.failed == ["validate_seeded"]
    assert "exit status 1, expected 0" in report.to_text()


def test_missing_manifest_baseline(workspace):
    (workspace / "baselines/sedov.manifest").unlink()
    report = run_suite(load_suite(workspace / "suite.txt"), "check")
    assert report.failed == ["sedov"]


def test_missing_fixture(workspace):
    (workspace / "suite.txt").write_text("TEST gone nowhere :: list :: 0\n")
    with pytest.raises(MissingFixture):
        run_suite(load_suite(workspace / "suite.txt"), "record")


@pytest.mark.parametrize(
    "text",
    [
        "TEST a clean :: list :: 0\nTEST a clean :: list :: 0\n",
        "TEST a clean list 0\n",
        "TEST a clean :: list :: zero\n",
        "CASE a clean :: list :: 0\n",
        "TEST a/b clean :: list :: 0\n",
    ],
)
def test_bad_suite_files(text):
    with pytest.raises(HarnessError):
        parse_suite(text, Path("s.txt"))


def test_parallel_and_order_independent(workspace):
    spec = load_suite(workspace / "suite.txt")
    serial = run_suite(spec, "check", jobs=1)
    reversed_spec = type(spec)(spec.path, tuple(reversed(spec.cases)))
    parallel = run_suite(reversed_spec, "check", jobs=4)
    assert serial == parallel and serial.passed


def test_record_without_changes_touches_nothing(workspace):
    before = _snapshot(workspace / "baselines")
    run_suite(load_suite(workspace / "suite.txt"), "record")
    assert _snapshot(workspace / "baselines") == before


def test_run_case_reports_problems(workspace):
    case = TestCase("adhoc", workspace / "clean", ("setup", "Nope"), 0, workspace / "baselines")
    result = run_case(case, "record")
    assert not result.passed and result.problems == ("exit status 2, expected 0",)


def test_discover_unit_tests(clean_tree, golden):
    cases = discover_unit_tests(clean_tree)
    golden("discovered_unit_tests.txt", "".join(c.to_line("clean") + "\n" for c in cases))
    assert [c.name for c in cases] == ["unitTest_ParticlesAdvance", "unitTest_ParticlesMove"]
