"""Inclusion closure for one application.

Starting from the chosen Simulation setup, REQUIRES and REQUESTS directives
are followed recursively, unit roots pull in their ``<Unit>Main`` subunit,
and each exclusive implementation group gets at most one member.  Group
selection precedence: hard inclusions (REQUIRES, honored REQUESTS,
``--with-unit``, ``--unit-impl``) always win over DEFAULT; two hard
inclusions naming different siblings are a conflict.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Mapping

from .config_lang import Default, Requests, Requires, normalize_tree_path
from .errors import (
    BadDefault,
    ExcludedRequireTarget,
    ImplementationConflict,
    MissingRequireTarget,
    UnknownOverrideTarget,
    UnknownSimulation,
)
from .tree import NodeKind, UnitTree, ancestors, is_under, join, list_simulations, parent_of

EXCLUDED_BY_CLI = "excluded by command line"
DEFAULT_EXCLUDED_BY_CLI = "default excluded by command line"


@dataclass(frozen=True)
class SetupRequest:
    simulation: str
    with_units: tuple[str, ...] = ()
    without_units: tuple[str, ...] = ()
    impl_choices: Mapping[str, str] = field(default_factory=dict)
    parfile: str | None = None

    def __post_init__(self):
        norm = lambda paths: tuple(sorted({normalize_tree_path(p) for p in paths}))
        object.__setattr__(self, "with_units", norm(self.with_units))
        object.__setattr__(self, "without_units", norm(self.without_units))
        object.__setattr__(
            self,
            "impl_choices",
            dict(sorted((normalize_tree_path(k), v) for k, v in dict(self.impl_choices).items())),
        )
        both = set(self.with_units) & set(self.without_units)
        if both:
            raise ValueError(f"paths both included and excluded: {', '.join(sorted(both))}")

    def normalized(self) -> str:
        """Canonical one-line rendering (host independent)."""
        from pathlib import PurePath

        parts = [
            "with=" + ",".join(self.with_units),
            "without=" + ",".join(self.without_units),
            "impl=" + ",".join(f"{k}={v}" for k, v in self.impl_choices.items()),
            "parfile=" + (PurePath(self.parfile).name if self.parfile else ""),
        ]
        return " ".join(parts)


@dataclass(frozen=True)
class UnitClosure:
    simulation: str
    included: tuple[str, ...]
    chosen_impl: dict[str, str]
    dropped: tuple[tuple[str, str], ...] = ()

    def __contains__(self, path: object) -> bool:
        return path in self._included_set

    @cached_property
    def _included_set(self) -> frozenset[str]:
        return frozenset(self.included)

    @property
    def setup_path(self) -> str:
        return f"Simulation/{self.simulation}"


class _Retract(Exception):
    def __init__(self, key: tuple[str, str]):
        self.key = key


def _check_request(tree: UnitTree, req: SetupRequest) -> None:
    if req.simulation not in list_simulations(tree):
        raise UnknownSimulation(f"no simulation setup named {req.simulation!r}")
    for p in req.with_units + req.without_units:
        if p not in tree:
            raise UnknownOverrideTarget(f"command line names unknown path {p!r}")
    for group, child in req.impl_choices.items():
        if group not in tree:
            raise UnknownOverrideTarget(f"--unit-impl names unknown group {group!r}")
        if child not in tree.impl_group(group):
            raise UnknownOverrideTarget(f"{child!r} is not an implementation under {group!r}")


def resolve(tree: UnitTree, req: SetupRequest) -> UnitClosure:
    _check_request(tree, req)
    suppressed: set[tuple[str, str]] = set()
    while True:
        try:
            return _attempt(tree, req, suppressed)
        except _Retract as r:
            suppressed.add(r.key)


def _attempt(tree: UnitTree, req: SetupRequest, suppressed: set[tuple[str, str]]) -> UnitClosure:
    included: set[str] = set()
    hard: dict[str, tuple[str, str]] = {}
    soft: dict[str, str] = {}
    defaults: dict[str, str] = {}
    dropped: set[tuple[str, str]] = set()
    queue: deque[str] = deque()

    def excluded(path: str) -> bool:
        return any(is_under(path, w) for w in req.without_units)

    def select(parent: str, child: str, source: str) -> None:
        if parent in hard and hard[parent][0] != child:
            raise ImplementationConflict(
                parent, hard[parent][0], child, f"{hard[parent][1]} vs {source}"
            )
        if parent in soft and soft[parent] != child:
            raise _Retract((parent, soft[parent]))
        hard.setdefault(parent, (child, source))

    def include(path: str, source: str | None) -> None:
        for p in [path, *ancestors(path)]:
            node = tree[p]
            if node.kind is NodeKind.IMPLEMENTATION and source is not None:
                select(node.parent, node.name, source)
            if p not in included:
                included.add(p)
                queue.append(p)

    def require(target: str, source: str) -> None:
        if target not in tree:
            raise MissingRequireTarget(f"required path {target!r} does not exist (required by {source})")
        if excluded(target):
            raise ExcludedRequireTarget(f"{target!r} is required by {source} but excluded on the command line")
        include(target, source)

    def process(path: str) -> None:
        node = tree[path]
        if node.kind is NodeKind.UNIT_ROOT:
            main = join(path, node.name + "Main")
            if main in tree:
                if excluded(main):
                    dropped.add((main, EXCLUDED_BY_CLI))
                else:
                    include(main, None)
        cfg = node.config
        if cfg is not None:
            for d, line in zip(cfg.directives, cfg.source_lines):
                where = f"{cfg.file_path}:{line}"
                if isinstance(d, Requires):
                    require(d.target, where)
                elif isinstance(d, Requests):
                    if d.target not in tree:
                        raise MissingRequireTarget(f"requested path {d.target!r} does not exist (requested by {where})")
                    if excluded(d.target):
                        dropped.add((d.target, EXCLUDED_BY_CLI))
                    else:
                        include(d.target, where)
                elif isinstance(d, Default):
                    if d.child not in tree.impl_group(path):
                        raise BadDefault(f"DEFAULT {d.child!r} is not an implementation directory of {path!r}", cfg.file_path, line)
                    defaults[path] = d.child
        if path in req.impl_choices:
            choice = join(path, req.impl_choices[path])
            if excluded(choice):
                raise ExcludedRequireTarget(f"--unit-impl selects {choice!r}, which is also excluded")
            include(choice, "command line")

    def drain() -> None:
        while queue:
            process(queue.popleft())

    include(tree.setup_path(req.simulation), None)
    for p in req.with_units:
        require(p, "command line")
    drain()

    while True:
        applied = False
        for parent in sorted(defaults):
            if parent in hard or parent in soft:
                continue
            child = defaults[parent]
            target = join(parent, child)
            if (parent, child) in suppressed:
                continue
            if excluded(target):
                dropped.add((target, DEFAULT_EXCLUDED_BY_CLI))
                continue
            soft[parent] = child
            include(target, None)
            applied = True
            drain()
        if not applied:
            break

    chosen = {p: c for p, (c, _) in hard.items()}
    chosen.update(soft)
    return UnitClosure(
        simulation=req.simulation,
        included=tuple(sorted(included)),
        chosen_impl=dict(sorted(chosen.items())),
        dropped=tuple(sorted(dropped)),
    )


def closure_violations(tree: UnitTree, closure: UnitClosure) -> list[str]:
    """Check the three closure invariants; returns human-readable violations."""
    inc = set(closure.included)
    problems = []
    for p in sorted(inc):
        parent = parent_of(p)
        if parent and parent not in inc:
            problems.append(f"ancestor closure: {p} included without {parent}")
        cfg = tree[p].config
        if cfg is not None:
            for d in cfg.of_kind(Requires):
                if d.target not in inc:
                    problems.append(f"requires closure: {cfg.file_path} requires {d.target}")
    for parent, group in tree.impl_groups().items():
        members = [c for c in group if join(parent, c) in inc]
        if len(members) > 1:
            problems.append(f"exclusivity: {parent} has {members}")
    return problems


def _combos(tree: UnitTree, path: str) -> list[dict[str, str]]:
    parts: list[list[dict[str, str]]] = []
    group = tree.impl_group(path)
    if group:
        opts = []
        for child in group:
            for sub in _combos(tree, join(path, child)):
                opts.append({path: child, **sub})
        parts.append(opts)
    for node in tree.children(path):
        if node.kind is NodeKind.SUBUNIT:
            parts.append(_combos(tree, node.path))
    out = []
    for pick in product(*parts):
        merged: dict[str, str] = {}
        for d in pick:
            merged.update(d)
        out.append(merged)
    return out


def enumerate_valid_configurations(tree: UnitTree, unit: str) -> list[dict[str, str]]:
    """Every complete implementation choice for ``unit``.

    Groups nested inside an implementation only vary when that
    implementation is chosen, so for flat units the count is the product
    of the group sizes.
    """
    if unit not in tree or tree[unit].kind is not NodeKind.UNIT_ROOT:
        raise KeyError(f"{unit!r} is not a unit")
    combos = _combos(tree, unit)
    return sorted((dict(sorted(c.items())) for c in combos), key=lambda c: tuple(c.items()))
