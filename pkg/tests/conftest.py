import os
import shutil
from pathlib import Path

import pytest

from composekit import scan_tree

HERE = Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"
CLEAN = FIXTURES / "clean"
SEEDED = FIXTURES / "seeded"
GOLDEN = HERE / "golden"
UPDATE_GOLDEN = os.environ.get("COMPOSEKIT_UPDATE_GOLDEN") == "1"

F90_STUB = "!!****f* X/x\n!!***\nsubroutine x()\nend subroutine x\n"


@pytest.fixture(scope="session")
def clean_tree():
    return scan_tree(CLEAN)


@pytest.fixture(scope="session")
def seeded_tree():
    return scan_tree(SEEDED)


@pytest.fixture
def clean_copy(tmp_path):
    dest = tmp_path / "clean"
    shutil.copytree(CLEAN, dest)
    return dest


@pytest.fixture
def make_tree(tmp_path):
    """Build a throwaway tree from ``{relative path: content}``.

    A path ending in ``.F90`` with content ``None`` gets a documented stub;
    a path ending in ``/`` is created as an empty directory.
    """

    def build(layout: dict, root_name: str = "tree"):
        root = tmp_path / root_name
        (root / "Simulation").mkdir(parents=True, exist_ok=True)
        for rel, content in layout.items():
            p = root / rel
            if rel.endswith("/"):
                p.mkdir(parents=True, exist_ok=True)
                continue
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(F90_STUB if content is None else content)
        return root

    return build


@pytest.fixture
def golden():
    """Compare text to tests/golden/<name>; rewrite when COMPOSEKIT_UPDATE_GOLDEN=1."""

    def check(name: str, text: str):
        path = GOLDEN / name
        if UPDATE_GOLDEN:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        assert path.exists(), f"golden file {name} missing; rerun with COMPOSEKIT_UPDATE_GOLDEN=1"
        assert text == path.read_text(encoding="utf-8")

    return check


def shuffle_configs(root: Path, rng) -> None:
    """Rewrite every Config under ``root`` with its lines in random order."""
    for cfg in sorted(root.rglob("Config")):
        lines = cfg.read_text().splitlines()
        rng.shuffle(lines)
        cfg.write_text("".join(line + "\n" for line in lines))


# -- acceptance summary ------------------------------------------------------------

_acceptance: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance[name] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance):
        terminalreporter.write_line(f"{_acceptance[name]}  {name}")
