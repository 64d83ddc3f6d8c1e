"""Source-tree scanning and directory classification.

Layout conventions::

    <Unit>/                     UnitRoot       capitalized, directly under the root
    <Unit>/<Unit>Xxx/           Subunit        name starts with the unit name
    .../<lowercase>/            ImplementationDir  (siblings are alternatives)
    .../unitTest/               UnitTestDir    unit-side half of a unit test
    Simulation/                 SimulationContainer
    Simulation/<Setup>/         SimulationSetup
    Simulation/<group>/<Setup>/ setups may be grouped (e.g. ``unitTest``)

Each directory may carry a ``Config`` file.  Source files (``.F90`` by
default) are one routine per file, named after the routine.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .config_lang import CONFIG_FILENAME, ConfigFile, read_config
from .errors import ClassificationError, MissingSimulationUnit, NonApiFileAtRoot, ScanError

SIMULATION = "Simulation"
UNIT_TEST = "unitTest"
DEFAULT_SRC_EXTS = (".F90",)
DOC_SENTINEL = "!!****"
DATA_MARKER = "!!DATA"

_UNIT_NAME = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
_IMPL_NAME = re.compile(r"[a-z][a-z0-9_]*\Z")


class NodeKind(enum.Enum):
    UNIT_ROOT = "UnitRoot"
    SUBUNIT = "Subunit"
    IMPLEMENTATION = "ImplementationDir"
    UNIT_TEST = "UnitTestDir"
    SIMULATION_SETUP = "SimulationSetup"
    SIMULATION_CONTAINER = "SimulationContainer"


@dataclass(frozen=True)
class SourceFile:
    path: str
    routine: str
    data_uses: tuple[str, ...] = ()
    has_doc_header: bool = False

    @property
    def dir(self) -> str:
        return parent_of(self.path)


@dataclass(frozen=True)
class UnitNode:
    path: str
    kind: NodeKind
    unit: str
    config: ConfigFile | None = None
    sources: tuple[SourceFile, ...] = ()
    children: tuple[str, ...] = ()

    @property
    def name(self) -> str:
        return self.path.rsplit("/", 1)[-1]

    @property
    def depth(self) -> int:
        return depth_of(self.path)

    @property
    def parent(self) -> str:
        return parent_of(self.path)

    @property
    def is_simulation(self) -> bool:
        return self.kind in (NodeKind.SIMULATION_SETUP, NodeKind.SIMULATION_CONTAINER)


@dataclass(frozen=True)
class ApiRoutine:
    name: str
    unit: str
    stub_path: str
    subunit: str | None = None


@dataclass(frozen=True)
class UnitTree:
    """Immutable, classified view of a source tree.

    ``nodes`` maps tree-relative directory paths to nodes; the tree root
    itself is implicit.  Every child list is sorted.
    """

    root: str = field(compare=False)
    nodes: dict[str, UnitNode]
    src_exts: tuple[str, ...] = DEFAULT_SRC_EXTS

    def __getitem__(self, path: str) -> UnitNode:
        return self.nodes[path]

    def __contains__(self, path: object) -> bool:
        return path in self.nodes

    @property
    def units(self) -> list[str]:
        return sorted(n.path for n in self.nodes.values() if n.kind is NodeKind.UNIT_ROOT)

    @property
    def simulations(self) -> list[str]:
        return list_simulations(self)

    def children(self, path: str) -> list[UnitNode]:
        node = self.nodes[path]
        return [self.nodes[join(path, c)] for c in node.children]

    def subtree(self, path: str) -> Iterator[UnitNode]:
        """``path`` and every node below it, in sorted pre-order."""
        node = self.nodes[path]
        yield node
        for child in node.children:
            yield from self.subtree(join(path, child))

    def impl_group(self, parent: str) -> list[str]:
        """Names of the ImplementationDir children of ``parent`` (possibly empty)."""
        return [c.name for c in self.children(parent) if c.kind is NodeKind.IMPLEMENTATION]

    def impl_groups(self) -> dict[str, list[str]]:
        out = {}
        for path in sorted(self.nodes):
            group = self.impl_group(path)
            if group:
                out[path] = group
        return out

    def sources(self) -> Iterator[SourceFile]:
        for path in sorted(self.nodes):
            yield from self.nodes[path].sources

    def setup_path(self, simulation: str) -> str:
        return f"{SIMULATION}/{simulation}"


def join(parent: str, name: str) -> str:
    return f"{parent}/{name}" if parent else name


def parent_of(path: str) -> str:
    return path.rsplit("/", 1)[0] if "/" in path else ""


def depth_of(path: str) -> int:
    return path.count("/") + 1 if path else 0


def ancestors(path: str) -> list[str]:
    """Proper ancestors of ``path``, nearest first, excluding the tree root."""
    out = []
    while "/" in path:
        path = path.rsplit("/", 1)[0]
        out.append(path)
    return out


def is_under(path: str, top: str) -> bool:
    return path == top or path.startswith(top + "/")


def _list_dir(path: Path) -> list[os.DirEntry]:
    with os.scandir(path) as it:
        return list(it)


def _read_source(file: Path, rel: str) -> SourceFile:
    text = file.read_text(encoding="utf-8", errors="replace")
    data_uses: list[str] = []
    first = None
    for line in text.splitlines():
        stripped = line.strip()
        if first is None and stripped:
            first = stripped
        if stripped.startswith(DATA_MARKER):
            data_uses.extend(stripped[len(DATA_MARKER):].split())
    routine = file.name[: -len(file.suffix)] if file.suffix else file.name
    return SourceFile(
        path=rel,
        routine=routine,
        data_uses=tuple(data_uses),
        has_doc_header=first is not None and first.startswith(DOC_SENTINEL),
    )


def _classify(rel: str, parent: UnitNode | None, has_config: bool, has_files: bool, has_dirs: bool) -> tuple[NodeKind, str]:
    name = rel.rsplit("/", 1)[-1]
    if parent is None:
        if name == SIMULATION:
            return NodeKind.SIMULATION_CONTAINER, SIMULATION
        if _UNIT_NAME.match(name):
            return NodeKind.UNIT_ROOT, name
        raise ClassificationError(f"top-level directory {name!r} is not a unit (units are capitalized)", rel)

    if parent.is_simulation:
        if parent.kind is NodeKind.SIMULATION_SETUP:
            raise ClassificationError("simulation setups may not contain subdirectories", rel)
        if not has_config and not has_files and has_dirs:
            return NodeKind.SIMULATION_CONTAINER, SIMULATION
        return NodeKind.SIMULATION_SETUP, SIMULATION

    unit = parent.unit
    if parent.kind is NodeKind.UNIT_TEST:
        raise ClassificationError("unitTest directories may not contain subdirectories", rel)
    if name == UNIT_TEST:
        return NodeKind.UNIT_TEST, unit
    if _IMPL_NAME.match(name):
        return NodeKind.IMPLEMENTATION, unit
    if parent.kind is NodeKind.UNIT_ROOT and name.startswith(unit) and len(name) > len(unit):
        return NodeKind.SUBUNIT, unit
    raise ClassificationError(
        f"directory {name!r} matches no convention under {parent.kind.value} {parent.path!r}", rel
    )


def scan_tree(root: str | os.PathLike, src_exts: Iterable[str] = DEFAULT_SRC_EXTS) -> UnitTree:
    """Walk ``root`` and classify every directory.  Symlinks are not followed."""
    root_path = Path(root)
    exts = tuple(sorted({e if e.startswith(".") else "." + e for e in src_exts}))
    if not (root_path / SIMULATION).is_dir():
        raise MissingSimulationUnit(f"no {SIMULATION} directory under {root_path}")

    nodes: dict[str, UnitNode] = {}

    def entries(path: Path) -> tuple[list[str], list[str]]:
        dirs, files = [], []
        for e in _list_dir(path):
            if e.name.startswith(".") or e.is_symlink():
                continue
            if e.is_dir(follow_symlinks=False):
                dirs.append(e.name)
            elif e.is_file(follow_symlinks=False):
                files.append(e.name)
        return sorted(dirs), sorted(files)

    def visit(path: Path, rel: str, parent: UnitNode | None) -> None:
        dirs, files = entries(path)
        has_config = CONFIG_FILENAME in files
        srcs = [f for f in files if os.path.splitext(f)[1] in exts]
        kind, unit = _classify(rel, parent, has_config, bool(srcs), bool(dirs))

        config = read_config(path / CONFIG_FILENAME, rel) if has_config else None
        sources = tuple(_read_source(path / f, join(rel, f)) for f in srcs)
        seen: dict[str, str] = {}
        for s in sources:
            if s.routine in seen:
                raise ScanError(f"routine {s.routine!r} defined by both {seen[s.routine]} and {s.path}", rel)
            seen[s.routine] = s.path

        node = UnitNode(rel, kind, unit, config, sources, tuple(dirs))
        nodes[rel] = node
        for d in dirs:
            visit(path / d, join(rel, d), node)

    top_dirs, _ = entries(root_path)
    for d in top_dirs:
        visit(root_path / d, d, None)

    return UnitTree(str(root_path), dict(sorted(nodes.items())), exts)


def discover_api(tree: UnitTree, unit: str) -> list[ApiRoutine]:
    """API routines of ``unit``: the null-implementation stubs at its root."""
    node = tree.nodes.get(unit)
    if node is None or node.kind is not NodeKind.UNIT_ROOT:
        raise KeyError(f"{unit!r} is not a unit")
    api = []
    for src in node.sources:
        if not is_api_name(src.routine, unit):
            raise NonApiFileAtRoot(f"{src.routine!r} at the root of {unit} is not named {unit}_*", src.path)
        api.append(ApiRoutine(src.routine, unit, src.path))
    return sorted(api, key=lambda r: r.name)


def is_api_name(routine: str, unit: str) -> bool:
    return routine.startswith(unit + "_") and len(routine) > len(unit) + 1


def list_simulations(tree: UnitTree) -> list[str]:
    prefix = SIMULATION + "/"
    return sorted(
        n.path[len(prefix):] for n in tree.nodes.values() if n.kind is NodeKind.SIMULATION_SETUP
    )


def classification_listing(tree: UnitTree) -> str:
    """One ``<kind> <path>`` line per node, for golden comparisons."""
    return "".join(f"{n.kind.value} {n.path}\n" for n in tree.nodes.values())
