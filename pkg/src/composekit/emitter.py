"""Deterministic build manifest.

Text layout (UTF-8, LF, one record per line, every section sorted)::

    COMPOSEKIT-MANIFEST 1
    TOOL composekit <version>
    SETUP <simulation>
    REQUEST with=... without=... impl=... parfile=...
    HASH <sha256 of every other line>
    FILE <routine> <path> [null]
    PARAM <name> <TYPE> <value> <source>=<value> ...
    VAR <name> <index>
    INIT <k> <unit>
    FINAL <unit>
    DROPPED <path> "<reason>"

FINAL lines list the finalize order, which is the init order reversed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from . import __version__
from .arbitrator import (
    FileChoice,
    InitOrder,
    ParamEntry,
    collect_candidates,
    merge_parameters,
    select_implementations,
)
from .config_lang import ParFile, render_literal, tokenize
from .errors import ComposeError, UnknownName
from .resolver import SetupRequest, UnitClosure
from .tree import UnitTree

MAGIC = "COMPOSEKIT-MANIFEST 1"
TOOL = "composekit"


class ManifestFormatError(ComposeError):
    pass


@dataclass(frozen=True)
class FileRecord:
    routine: str
    path: str
    null: bool = False


@dataclass(frozen=True)
class ParamRecord:
    name: str
    ptype: str
    value: str
    chain: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class Manifest:
    tool_version: str
    setup: str
    request: str
    content_hash: str
    files: tuple[FileRecord, ...] = ()
    parameters: tuple[ParamRecord, ...] = ()
    variables: tuple[tuple[str, int], ...] = ()
    init_order: tuple[str, ...] = ()
    finalize_order: tuple[str, ...] = ()
    dropped: tuple[tuple[str, str], ...] = ()

    def body_lines(self) -> list[str]:
        lines = [MAGIC, f"TOOL {TOOL} {self.tool_version}", f"SETUP {self.setup}", f"REQUEST {self.request}"]
        for f in self.files:
            lines.append(f"FILE {f.routine} {f.path}" + (" null" if f.null else ""))
        for p in self.parameters:
            chain = " ".join(f"{src}={val}" for src, val in p.chain)
            lines.append(f"PARAM {p.name} {p.ptype} {p.value} {chain}")
        lines += [f"VAR {name} {idx}" for name, idx in self.variables]
        lines += [f"INIT {k} {u}" for k, u in enumerate(self.init_order, start=1)]
        lines += [f"FINAL {u}" for u in self.finalize_order]
        lines += [f'DROPPED {path} "{reason}"' for path, reason in self.dropped]
        return lines

    def to_text(self) -> str:
        lines = self.body_lines()
        lines.insert(4, f"HASH {self.content_hash}")
        return "".join(line + "\n" for line in lines)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["variables"] = [{"name": n, "index": i} for n, i in self.variables]
        doc["dropped"] = [{"path": p, "reason": r} for p, r in self.dropped]
        for p in doc["parameters"]:
            p["chain"] = [{"source": s, "value": v} for s, v in p["chain"]]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def content_hash(body_lines: list[str]) -> str:
    return hashlib.sha256("".join(line + "\n" for line in body_lines).encode("utf-8")).hexdigest()


def emit_manifest(
    file_map: dict[str, FileChoice],
    params: dict[str, ParamEntry],
    variables: dict[str, int],
    init_order: InitOrder,
    request: SetupRequest,
    dropped: tuple[tuple[str, str], ...] = (),
) -> tuple[Manifest, str]:
    files = tuple(FileRecord(r, c.path, c.null) for r, c in sorted(file_map.items()))
    prec = tuple(
        ParamRecord(
            e.name,
            e.ptype.value,
            render_literal(e.value, e.ptype),
            tuple((src, render_literal(v, e.ptype)) for src, v in e.chain),
        )
        for _, e in sorted(params.items())
    )
    draft = Manifest(
        tool_version=__version__,
        setup=request.simulation,
        request=request.normalized(),
        content_hash="",
        files=files,
        parameters=prec,
        variables=tuple(sorted(variables.items())),
        init_order=init_order.order,
        finalize_order=init_order.finalize,
        dropped=tuple(sorted(dropped)),
    )
    manifest = Manifest(**{**draft.__dict__, "content_hash": content_hash(draft.body_lines())})
    return manifest, manifest.to_text()


def _split_source(token: str) -> tuple[str, str]:
    src, sep, val = token.partition("=")
    if not sep:
        raise ValueError(f"bad chain element {token!r}")
    return src, val


def read_manifest(text: str) -> Manifest:
    """Parse the text form back into a :class:`Manifest` and verify its hash."""
    header: dict[str, str] = {}
    files, params, variables, init, final, dropped = [], [], [], [], [], []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != MAGIC:
        raise ManifestFormatError("not a composekit manifest", line=1)
    body = []
    for n, line in enumerate(lines, start=1):
        kind, _, rest = line.partition(" ")
        try:
            if kind == "HASH":
                header["hash"] = rest
                continue
            body.append(line)
            if n == 1:
                continue
            if kind == "TOOL":
                name, version = rest.split(" ")
                header["version"] = version
            elif kind in ("SETUP", "REQUEST"):
                header[kind] = rest
            elif kind == "FILE":
                parts = rest.split(" ")
                if len(parts) == 3 and parts[2] == "null":
                    files.append(FileRecord(parts[0], parts[1], True))
                elif len(parts) == 2:
                    files.append(FileRecord(parts[0], parts[1]))
                else:
                    raise ValueError("malformed FILE record")
            elif kind == "PARAM":
                toks = tokenize(rest)
                name, ptype, value = toks[:3]
                params.append(ParamRecord(name, ptype, value, tuple(_split_source(t) for t in toks[3:])))
            elif kind == "VAR":
                name, idx = rest.split(" ")
                variables.append((name, int(idx)))
            elif kind == "INIT":
                k, unit = rest.split(" ")
                if int(k) != len(init) + 1:
                    raise ValueError("INIT records out of sequence")
                init.append(unit)
            elif kind == "FINAL":
                final.append(rest)
            elif kind == "DROPPED":
                path, _, reason = rest.partition(" ")
                dropped.append((path, reason.strip('"')))
            else:
                raise ValueError(f"unknown record {kind!r}")
        except ValueError as exc:
            raise ManifestFormatError(str(exc), line=n) from None
    manifest = Manifest(
        tool_version=header.get("version", ""),
        setup=header.get("SETUP", ""),
        request=header.get("REQUEST", ""),
        content_hash=header.get("hash", ""),
        files=tuple(files),
        parameters=tuple(params),
        variables=tuple(variables),
        init_order=tuple(init),
        finalize_order=tuple(final),
        dropped=tuple(dropped),
    )
    if content_hash(manifest.body_lines()) != manifest.content_hash:
        raise ManifestFormatError("content hash does not match manifest body")
    return manifest


# -- explanations ----------------------------------------------------------------------


ROUTINE_RULE = "Simulation setup file wins; otherwise the deepest included directory; the unit-root stub is the fallback"
PARAM_RULE = "unit Configs by depth < Simulation Configs < parfile; the last entry is effective"


@dataclass(frozen=True)
class Explanation:
    kind: str  # "routine" or "parameter"
    name: str
    rule: str
    entries: tuple[tuple[str, str], ...]  # (source, detail)
    selected: str

    def to_text(self) -> str:
        out = [f"{self.kind} {self.name}", f"rule: {self.rule}"]
        for src, detail in self.entries:
            mark = "*" if src == self.selected else " "
            out.append(f" {mark} {src} {detail}")
        return "\n".join(out) + "\n"


def explain(name: str, tree: UnitTree, closure: UnitClosure, parfile: ParFile | None = None) -> Explanation:
    cands = collect_candidates(tree, closure)
    if name in cands:
        choice = select_implementations(tree, closure)[name]
        entries = tuple(
            (c.path, f"depth={c.depth}" + (" simulation" if c.simulation else "")) for c in cands[name]
        )
        return Explanation("routine", name, ROUTINE_RULE, entries, choice.path)
    params = merge_parameters(tree, closure, parfile)
    if name in params:
        e = params[name]
        entries = tuple((src, render_literal(v, e.ptype)) for src, v in e.chain)
        return Explanation("parameter", name, PARAM_RULE, entries, e.chain[-1][0])
    raise UnknownName(f"{name!r} is neither a routine nor a parameter of this setup")
