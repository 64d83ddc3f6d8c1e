"""Golden-baseline regression runner over CLI invocations.

A suite file holds one case per line::

    TEST <name> <fixture-dir> :: <argv...> :: <expected-exit>

Fixture directories are relative to the suite file.  Baselines live in
``baselines/`` next to it: ``<name>.manifest`` (byte-compared) and
``<name>.report`` (captured stdout, compared after sorting lines).
"""

from __future__ import annotations

import difflib
import io
import re
import shlex
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .cli import main
from .errors import BaselineAbsent, HarnessError, MissingFixture
from .tree import UNIT_TEST, UnitTree

BASELINE_DIR = "baselines"
_NAME = re.compile(r"[A-Za-z0-9_.-]+\Z")


@dataclass(frozen=True)
class TestCase:
    name: str
    fixture: Path
    argv: tuple[str, ...]
    exit_status: int = 0
    baseline_dir: Path = Path(BASELINE_DIR)

    __test__ = False  # not a pytest class

    @property
    def manifest_baseline(self) -> Path:
        return self.baseline_dir / f"{self.name}.manifest"

    @property
    def report_baseline(self) -> Path:
        return self.baseline_dir / f"{self.name}.report"

    def to_line(self, fixture_label: str | None = None) -> str:
        label = fixture_label if fixture_label is not None else str(self.fixture)
        return f"TEST {self.name} {label} :: {shlex.join(self.argv)} :: {self.exit_status}"


@dataclass(frozen=True)
class SuiteSpec:
    path: Path
    cases: tuple[TestCase, ...]


@dataclass(frozen=True)
class CaseResult:
    name: str
    passed: bool
    problems: tuple[str, ...] = ()
    diff: str = ""


@dataclass(frozen=True)
class SuiteReport:
    mode: str
    results: tuple[CaseResult, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failed(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

    def to_text(self) -> str:
        out = []
        for r in self.results:
            out.append(("PASS " if r.passed else "FAIL ") + r.name)
            out += [f"  {p}" for p in r.problems]
            if r.diff:
                out += ["  " + line for line in r.diff.splitlines()]
        n = sum(r.passed for r in self.results)
        out.append(f"{n}/{len(self.results)} passed ({self.mode})")
        return "\n".join(out) + "\n"


def parse_suite(text: str, path: Path) -> SuiteSpec:
    base = path.parent
    cases = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("::")]
        head = parts[0].split()
        if len(parts) != 3 or len(head) != 3 or head[0] != "TEST":
            raise HarnessError("expected 'TEST <name> <fixture> :: <argv...> :: <exit>'", str(path), lineno)
        _, name, fixture = head
        if not _NAME.match(name):
            raise HarnessError(f"bad test name {name!r}", str(path), lineno)
        try:
            status = int(parts[2])
        except ValueError:
            raise HarnessError(f"bad exit status {parts[2]!r}", str(path), lineno) from None
        cases.append(TestCase(name, base / fixture, tuple(shlex.split(parts[1])), status, base / BASELINE_DIR))
    names = [c.name for c in cases]
    dups = sorted({n for n in names if names.count(n) > 1})
    if dups:
        raise HarnessError(f"duplicate test names: {', '.join(dups)}", str(path))
    return SuiteSpec(path, tuple(cases))


def load_suite(path: Path) -> SuiteSpec:
    return parse_suite(Path(path).read_text(encoding="utf-8"), Path(path))


def _execute(case: TestCase, scratch: Path) -> tuple[int, str, bytes | None]:
    out = io.StringIO()
    argv = [*case.argv, "--tree", str(case.fixture), "--objdir", str(scratch)]
    # stderr carries absolute paths, so it is not part of the baseline
    status = main(argv, out=out, err=io.StringIO())
    manifest = scratch / "manifest.txt"
    return status, out.getvalue(), manifest.read_bytes() if manifest.exists() else None


def _sorted_report(text: str) -> str:
    return "".join(sorted(line + "\n" for line in text.splitlines()))


def _diff(expected: str, actual: str, label: str) -> str:
    return "".join(
        difflib.unified_diff(
            expected.splitlines(keepends=True), actual.splitlines(keepends=True),
            f"{label} (baseline)", f"{label} (actual)", n=0,
        )
    )


def _manifest_diff(expected: bytes, actual: bytes, label: str) -> str:
    def body(b: bytes) -> str:
        return "".join(l for l in b.decode("utf-8").splitlines(keepends=True) if not l.startswith("HASH "))

    # the hash line is derived, so show it only when nothing else differs
    d = _diff(body(expected), body(actual), label)
    return d or _diff(expected.decode("utf-8"), actual.decode("utf-8"), label)


def _write_if_changed(path: Path, data: bytes) -> None:
    if path.exists() and path.read_bytes() == data:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)


def run_case(case: TestCase, mode: str = "check") -> CaseResult:
    with tempfile.TemporaryDirectory(prefix="composekit-") as tmp:
        status, report, manifest = _execute(case, Path(tmp) / "object")
    report = _sorted_report(report)
    problems = []
    if status != case.exit_status:
        problems.append(f"exit status {status}, expected {case.exit_status}")

    if mode == "record":
        _write_if_changed(case.report_baseline, report.encode("utf-8"))
        if manifest is not None:
            _write_if_changed(case.manifest_baseline, manifest)
        elif case.manifest_baseline.exists():
            case.manifest_baseline.unlink()
        return CaseResult(case.name, not problems, tuple(problems))

    diffs = []
    expected_report = case.report_baseline.read_text(encoding="utf-8")
    if expected_report != report:
        diffs.append(_diff(expected_report, report, f"{case.name}.report"))
    has_baseline = case.manifest_baseline.exists()
    if manifest is None and has_baseline:
        problems.append("no manifest produced but a baseline exists")
    elif manifest is not None and not has_baseline:
        problems.append("manifest produced but no baseline exists")
    elif manifest is not None:
        expected = case.manifest_baseline.read_bytes()
        if expected != manifest:
            diffs.append(_manifest_diff(expected, manifest, f"{case.name}.manifest"))
    diff = "".join(diffs)
    return CaseResult(case.name, not problems and not diff, tuple(problems), diff)


def run_suite(spec: SuiteSpec, mode: str = "check", jobs: int = 1) -> SuiteReport:
    if mode not in ("check", "record"):
        raise ValueError(f"unknown mode {mode!r}")
    for case in spec.cases:
        if not case.fixture.is_dir():
            raise MissingFixture(f"fixture {case.fixture} for {case.name} does not exist", str(spec.path))
        if mode == "check" and not case.report_baseline.exists():
            raise BaselineAbsent(f"no baseline for {case.name}; run in record mode first", str(case.report_baseline))
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(lambda c: run_case(c, mode), spec.cases))
    return SuiteReport(mode, tuple(sorted(results, key=lambda r: r.name)))


def discover_unit_tests(tree: UnitTree) -> list[TestCase]:
    """One skeleton case per ``Simulation/unitTest/<X>`` setup."""
    prefix = UNIT_TEST + "/"
    out = []
    for sim in tree.simulations:
        if sim.startswith(prefix):
            out.append(TestCase(sim.replace("/", "_"), Path(tree.root), ("setup", sim), 0))
    return out
