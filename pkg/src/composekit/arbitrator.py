"""Turn a closure into concrete selections.

Routine selection ranks every same-named file by ``(in Simulation setup,
directory depth)``; the null stub at the unit root is always a candidate so
excluded units still link.  Parameters follow the same idea: unit Configs by
depth, then Simulation Configs, then the parfile.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field

from .config_lang import Parameter, ParamType, ParFile, Requests, Requires, Value, Variable, parse_runtime_value
from .errors import (
    AmbiguousImplementation,
    AmbiguousParameter,
    ConflictingTypes,
    MissingStub,
    TypeMismatch,
    UnknownParameter,
)
from .resolver import UnitClosure
from .tree import UnitTree, discover_api, is_api_name

DRIVER = "Driver"
PARFILE = "parfile"


@dataclass(frozen=True)
class Candidate:
    path: str
    depth: int
    simulation: bool = False

    @property
    def rank(self) -> tuple[bool, int]:
        return (self.simulation, self.depth)


@dataclass(frozen=True)
class FileChoice:
    routine: str
    path: str
    depth: int
    simulation: bool
    candidates: tuple[Candidate, ...]
    null: bool = False


FileMap = dict  # routine name -> FileChoice


def _stubs(tree: UnitTree) -> dict[str, str]:
    out = {}
    for unit in tree.units:
        for api in discover_api(tree, unit):
            out[api.name] = api.stub_path
    return out


def collect_candidates(tree: UnitTree, closure: UnitClosure) -> dict[str, list[Candidate]]:
    """Stub plus every same-stem file in an included directory, per routine."""
    stubs = _stubs(tree)
    cands: dict[str, list[Candidate]] = defaultdict(list)
    for routine, path in stubs.items():
        cands[routine].append(Candidate(path, path.count("/")))
    for p in closure.included:
        node = tree[p]
        for src in node.sources:
            if src.path == stubs.get(src.routine):
                continue
            cands[src.routine].append(Candidate(src.path, node.depth, node.is_simulation))
    return {r: sorted(c, key=lambda c: (c.rank, c.path)) for r, c in sorted(cands.items())}


def select_implementations(tree: UnitTree, closure: UnitClosure) -> dict[str, FileChoice]:
    stubs = _stubs(tree)
    out = {}
    for routine, cands in collect_candidates(tree, closure).items():
        if routine not in stubs:
            for c in cands:
                unit = tree[c.path.rsplit("/", 1)[0]].unit
                if not c.simulation and is_api_name(routine, unit):
                    raise MissingStub(f"{routine} is implemented at {c.path} but {unit} has no null implementation", c.path)
        best = max(c.rank for c in cands)
        top = [c for c in cands if c.rank == best]
        if len(top) > 1:
            raise AmbiguousImplementation(
                f"{routine}: {top[0].path} and {top[1].path} tie at depth {best[1]}", top[0].path
            )
        pick = top[0]
        out[routine] = FileChoice(
            routine=routine,
            path=pick.path,
            depth=pick.depth,
            simulation=pick.simulation,
            candidates=tuple(cands),
            null=pick.path == stubs.get(routine),
        )
    return out


# -- runtime parameters --------------------------------------------------------------


@dataclass(frozen=True)
class ParamEntry:
    name: str
    ptype: ParamType
    value: Value
    default: Value
    defined_in: str
    overridden_by: tuple[tuple[str, Value], ...] = ()

    @property
    def chain(self) -> tuple[tuple[str, Value], ...]:
        """Every definition in ascending precedence, the effective one last."""
        return ((self.defined_in, self.default),) + self.overridden_by


def merge_parameters(tree: UnitTree, closure: UnitClosure, parfile: ParFile | None = None) -> dict[str, ParamEntry]:
    defs: dict[str, list[tuple[tuple[bool, int], str, Parameter]]] = defaultdict(list)
    for p in closure.included:
        node = tree[p]
        if node.config is None:
            continue
        for d in node.config.of_kind(Parameter):
            defs[d.name].append(((node.is_simulation, node.depth), p, d))

    table = {}
    for name in sorted(defs):
        entries = sorted(defs[name], key=lambda e: (e[0], e[1]))
        types = {e[2].ptype for e in entries}
        if len(types) > 1:
            where = ", ".join(f"{e[1]}:{e[2].ptype.value}" for e in entries)
            raise ConflictingTypes(f"parameter {name} declared with different types ({where})", entries[-1][1])
        for a, b in zip(entries, entries[1:]):
            if a[0] == b[0] and a[2].default != b[2].default:
                raise AmbiguousParameter(
                    f"parameter {name} has conflicting defaults at equal precedence in {a[1]} and {b[1]}", b[1]
                )
        # equal-precedence duplicates with equal values collapse to one link
        chain: list[tuple[str, Value]] = []
        last_rank = None
        for rank, path, d in entries:
            if rank == last_rank:
                continue
            chain.append((path, d.default))
            last_rank = rank
        ptype = entries[0][2].ptype
        table[name] = ParamEntry(name, ptype, chain[-1][1], chain[0][1], chain[0][0], tuple(chain[1:]))

    if parfile is not None:
        for pname, raw, line in parfile.entries:
            if pname not in table:
                raise UnknownParameter(f"parfile sets undeclared parameter {pname!r}", parfile.source, line)
            entry = table[pname]
            try:
                parse_runtime_value(raw, entry.ptype)
            except ValueError:
                raise TypeMismatch(
                    f"{pname} is {entry.ptype.value} but the parfile gives {raw!r}", parfile.source, line
                ) from None
        for pname, raw in parfile.assignments.items():
            entry = table[pname]
            value = parse_runtime_value(raw, entry.ptype)
            table[pname] = ParamEntry(
                pname, entry.ptype, value, entry.default, entry.defined_in,
                entry.overridden_by + ((PARFILE, value),),
            )
    return table


# -- variables --------------------------------------------------------------------------


def assign_variable_indices(tree: UnitTree, closure: UnitClosure) -> dict[str, int]:
    names = set()
    for p in closure.included:
        cfg = tree[p].config
        if cfg is not None:
            names.update(v.name for v in cfg.of_kind(Variable))
    return {name: i for i, name in enumerate(sorted(names), start=1)}


# -- init / finalize order ----------------------------------------------------------


@dataclass(frozen=True)
class InitOrder:
    order: tuple[str, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def finalize(self) -> tuple[str, ...]:
        return tuple(reversed(self.order))


def unit_dependencies(tree: UnitTree, closure: UnitClosure) -> dict[str, set[str]]:
    """unit -> units it depends on, from REQUIRES and honored REQUESTS."""
    units = {tree[p].unit for p in closure.included if not tree[p].is_simulation}
    units.discard(DRIVER)
    deps: dict[str, set[str]] = {u: set() for u in units}
    for p in closure.included:
        node = tree[p]
        if node.is_simulation or node.unit not in units or node.config is None:
            continue
        for d in node.config.directives:
            if isinstance(d, (Requires, Requests)) and d.target in closure:
                dep = d.target.split("/", 1)[0]
                if dep in units and dep != node.unit:
                    deps[node.unit].add(dep)
    return deps


def compute_init_order(tree: UnitTree, closure: UnitClosure) -> InitOrder:
    deps = unit_dependencies(tree, closure)
    blocking = {u: set(d) for u, d in deps.items()}
    users: dict[str, set[str]] = defaultdict(set)
    for u, ds in deps.items():
        for d in ds:
            users[d].add(u)

    ready = [u for u, d in blocking.items() if not d]
    heapq.heapify(ready)
    order: list[str] = []
    warnings: list[str] = []
    done: set[str] = set()
    while len(order) < len(blocking):
        if not ready:
            # dependency cycle: break it at the lexicographically smallest unit
            stuck = min(u for u in blocking if u not in done)
            warnings.append(
                f"dependency cycle among {', '.join(sorted(u for u in blocking if u not in done))}; "
                f"initializing {stuck} first"
            )
            blocking[stuck].clear()
            heapq.heappush(ready, stuck)
        u = heapq.heappop(ready)
        if u in done:
            continue
        done.add(u)
        order.append(u)
        for user in sorted(users[u]):
            blocking[user].discard(u)
            if not blocking[user] and user not in done and user not in ready:
                heapq.heappush(ready, user)
    return InitOrder(tuple(order), tuple(warnings))
