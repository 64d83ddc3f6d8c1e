"""Static architecture checks over a scanned tree.

Rules::

    NULL-01  error    API-named routine implemented under a unit without a root stub
    SUB-01   error    API routine implemented under two different subunits
    SUB-02   error    subunit implements no API routine
    SUB-03   error    API routine implemented under no subunit
    MAIN-01  error    unit with an API has no <Unit>Main subunit
    DATA-01  error    !!DATA declaration names data owned elsewhere
    DOC-01   warning  API stub lacks a doc header
    DOC-02   warning  other source file lacks a doc header
    UT-01    error    Simulation/unitTest setup reaches no unit-side unitTest dir
    UT-02    warning  unit-side unitTest dir reached by no setup

Ownership checking only sees what files declare with ``!!DATA``; undeclared
access is invisible.
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import asdict, dataclass, field, replace

from .config_lang import Requires
from .resolver import UnitClosure
from .tree import (
    SIMULATION,
    UNIT_TEST,
    ApiRoutine,
    NodeKind,
    UnitTree,
    ancestors,
    discover_api,
    is_api_name,
    is_under,
    parent_of,
)

ERROR = "ERROR"
WARNING = "WARNING"

RULES = {
    "NULL-01": ERROR,
    "SUB-01": ERROR,
    "SUB-02": ERROR,
    "SUB-03": ERROR,
    "MAIN-01": ERROR,
    "DATA-01": ERROR,
    "DOC-01": WARNING,
    "DOC-02": WARNING,
    "UT-01": ERROR,
    "UT-02": WARNING,
}


@dataclass(frozen=True, order=True)
class Finding:
    path: str
    rule: str
    message: str
    severity: str = field(default=ERROR, compare=False)

    def to_text(self) -> str:
        return f"{self.severity} {self.rule} {self.path}: {self.message}"


def finding(rule: str, path: str, message: str) -> Finding:
    return Finding(path, rule, message, RULES[rule])


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @classmethod
    def of(cls, findings) -> "ValidationReport":
        return cls(tuple(sorted(set(findings))))

    def is_clean(self) -> bool:
        return not self.findings

    @property
    def has_errors(self) -> bool:
        return any(f.severity == ERROR for f in self.findings)

    @property
    def summary(self) -> dict[str, int]:
        return dict(sorted(Counter(f.rule for f in self.findings).items()))

    def to_text(self) -> str:
        return "".join(f.to_text() + "\n" for f in self.findings)

    def to_records(self) -> str:
        """One JSON object per line."""
        return "".join(
            json.dumps(asdict(f), sort_keys=True) + "\n" for f in self.findings
        )


def _unit_api(tree: UnitTree, unit: str) -> list[str]:
    return [r.name for r in discover_api(tree, unit)]


def check_null_coverage(tree: UnitTree) -> list[Finding]:
    out = []
    for unit in tree.units:
        stubs = set(_unit_api(tree, unit))
        missing = set()
        for node in tree.subtree(unit):
            if node.path == unit:
                continue
            for src in node.sources:
                if is_api_name(src.routine, unit) and src.routine not in stubs:
                    missing.add(src.routine)
        out += [finding("NULL-01", unit, f"{r} has no null implementation at the unit root") for r in sorted(missing)]
    return out


def _subunit_impls(tree: UnitTree, unit: str) -> dict[str, set[str]]:
    api = set(_unit_api(tree, unit))
    impls = {}
    for child in tree.children(unit):
        if child.kind is NodeKind.SUBUNIT:
            impls[child.name] = {
                s.routine for n in tree.subtree(child.path) for s in n.sources if s.routine in api
            }
    return impls


def check_subunit_partition(tree: UnitTree, unit: str) -> list[Finding]:
    api = _unit_api(tree, unit)
    if not api:
        return []
    impls = _subunit_impls(tree, unit)
    out = []
    for routine in api:
        owners = sorted(s for s, rs in impls.items() if routine in rs)
        if len(owners) > 1:
            out.append(finding("SUB-01", unit, f"{routine} is implemented in several subunits: {', '.join(owners)}"))
        elif not owners:
            out.append(finding("SUB-03", unit, f"{routine} is implemented in no subunit"))
    for sub, rs in sorted(impls.items()):
        if not rs:
            out.append(finding("SUB-02", f"{unit}/{sub}", f"subunit {sub} implements no {unit} API routine"))
    return out


def subunit_assignment(tree: UnitTree, unit: str) -> list[ApiRoutine]:
    """API routines of ``unit`` with their owning subunit (None when not unique)."""
    impls = _subunit_impls(tree, unit)
    out = []
    for api in discover_api(tree, unit):
        owners = [s for s, rs in impls.items() if api.name in rs]
        out.append(replace(api, subunit=owners[0] if len(owners) == 1 else None))
    return out


def check_main_subunit(tree: UnitTree, unit: str) -> list[Finding]:
    if not _unit_api(tree, unit):
        return []
    main = f"{unit}/{unit}Main"
    if main in tree and tree[main].kind is NodeKind.SUBUNIT:
        return []
    return [finding("MAIN-01", unit, f"unit {unit} has an API but no {unit}Main subunit")]


def check_data_ownership(tree: UnitTree) -> list[Finding]:
    owners = {}
    for node in tree.nodes.values():
        if node.kind in (NodeKind.UNIT_ROOT, NodeKind.SUBUNIT):
            owners[node.name] = node.path
    out = []
    for src in tree.sources():
        for ident in src.data_uses:
            owner = ident[: -len("_data")] if ident.endswith("_data") else None
            home = owners.get(owner) if owner else None
            if home is None:
                out.append(finding("DATA-01", src.path, f"{ident} names no known data owner"))
            elif not is_under(src.dir, home):
                out.append(finding("DATA-01", src.path, f"{ident} is owned by {home}; use its API instead"))
    return out


def check_doc_headers(tree: UnitTree) -> list[Finding]:
    out = []
    for src in tree.sources():
        if src.has_doc_header:
            continue
        if src.dir in tree.units and is_api_name(src.routine, src.dir):
            out.append(finding("DOC-01", src.path, f"API stub {src.routine} lacks a doc header"))
        else:
            out.append(finding("DOC-02", src.path, f"{src.routine} lacks a doc header"))
    return out


def _reached(tree: UnitTree, start: str) -> set[str]:
    """Nodes reachable from ``start``'s Config by following REQUIRES."""
    seen: set[str] = set()
    queue = deque([start])
    while queue:
        cfg = tree[queue.popleft()].config
        if cfg is None:
            continue
        for d in cfg.of_kind(Requires):
            if d.target in tree and d.target not in seen:
                seen.add(d.target)
                queue.append(d.target)
    return seen


def _unit_test_dirs(tree: UnitTree, paths) -> set[str]:
    out = set()
    for p in paths:
        for q in [p, *ancestors(p)]:
            if tree[q].kind is NodeKind.UNIT_TEST:
                out.add(q)
    return out


def check_unittest_pairing(tree: UnitTree) -> list[Finding]:
    out = []
    reached_any: set[str] = set()
    prefix = f"{SIMULATION}/{UNIT_TEST}/"
    for sim in tree.simulations:
        setup = tree.setup_path(sim)
        hits = _unit_test_dirs(tree, _reached(tree, setup))
        reached_any |= hits
        if setup.startswith(prefix) and not hits:
            out.append(finding("UT-01", setup, "unit-test setup requires no unitTest directory inside a unit"))
    for node in tree.nodes.values():
        if node.kind is NodeKind.UNIT_TEST and node.path not in reached_any:
            out.append(finding("UT-02", node.path, "no Simulation setup exercises this unitTest directory"))
    return out


def _finding_dir(tree: UnitTree, path: str) -> str:
    return path if path in tree else parent_of(path)


def validate_all(tree: UnitTree, closure: UnitClosure | None = None) -> ValidationReport:
    findings = check_null_coverage(tree)
    for unit in tree.units:
        findings += check_subunit_partition(tree, unit)
        findings += check_main_subunit(tree, unit)
    findings += check_data_ownership(tree)
    findings += check_doc_headers(tree)
    findings += check_unittest_pairing(tree)
    if closure is not None:
        findings = [f for f in findings if _finding_dir(tree, f.path) in closure]
    return ValidationReport.of(findings)
