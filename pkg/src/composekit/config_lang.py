"""The two input languages: per-directory ``Config`` files and runtime parfiles.

Config grammar, one directive per line::

    REQUIRES  <path>
    REQUESTS  <path>
    DEFAULT   <child>
    PARAMETER <name> INTEGER|REAL|BOOLEAN|STRING <literal>
    VARIABLE  <name>

``#`` starts a comment anywhere outside a string literal.  Keywords are
case-sensitive; operands keep their case.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .errors import ConfigSyntaxError, DuplicateDeclaration

CONFIG_FILENAME = "Config"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_VARNAME = re.compile(r"[a-z][a-z0-9_]*\Z")
_PATH_PART = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.+-]*\Z")
_INT_LIT = re.compile(r"[+-]?\d+\Z")
_REAL_LIT = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\Z")
_STR_LIT = re.compile(r'"[^"]*"\Z')
_PAR_LINE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S.*?)\s*\Z")


class ParamType(enum.Enum):
    INTEGER = "INTEGER"
    REAL = "REAL"
    BOOLEAN = "BOOLEAN"
    STRING = "STRING"


Value = Union[int, float, bool, str]


@dataclass(frozen=True)
class Requires:
    target: str


@dataclass(frozen=True)
class Requests:
    target: str


@dataclass(frozen=True)
class Default:
    child: str


@dataclass(frozen=True)
class Parameter:
    name: str
    ptype: ParamType
    default: Value


@dataclass(frozen=True)
class Variable:
    name: str


Directive = Union[Requires, Requests, Default, Parameter, Variable]


@dataclass(frozen=True)
class ConfigFile:
    """Parsed directives of the Config file in ``dir_path``.

    Line numbers are diagnostic only and excluded from equality.
    """

    dir_path: str
    directives: tuple[Directive, ...] = ()
    source_lines: tuple[int, ...] = field(default=(), compare=False)

    @property
    def file_path(self) -> str:
        return f"{self.dir_path}/{CONFIG_FILENAME}" if self.dir_path else CONFIG_FILENAME

    def of_kind(self, kind: type) -> list:
        return [d for d in self.directives if isinstance(d, kind)]

    def line_of(self, directive: Directive) -> int | None:
        for d, ln in zip(self.directives, self.source_lines):
            if d == directive:
                return ln
        return None


@dataclass(frozen=True)
class ParFile:
    """Runtime overrides.  ``entries`` keeps every assignment in file order;
    ``assignments`` holds the last value per name."""

    entries: tuple[tuple[str, str, int], ...] = ()
    source: str = "parfile"

    @property
    def assignments(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for name, value, _ in self.entries:
            out[name] = value
        return out

    def line_of(self, name: str) -> int | None:
        found = None
        for n, _, ln in self.entries:
            if n == name:
                found = ln
        return found


# -- lexical helpers -------------------------------------------------------------


def tokenize(line: str) -> list[str]:
    """Split on blanks, keeping ``"..."`` runs intact and dropping comments.

    Raises ``ValueError`` on an unterminated string.
    """
    tokens: list[str] = []
    cur: list[str] = []
    in_str = False
    for ch in line:
        if in_str:
            cur.append(ch)
            if ch == '"':
                in_str = False
        elif ch == '"':
            cur.append(ch)
            in_str = True
        elif ch == "#":
            break
        elif ch in " \t\r\n\f\v":
            if cur:
                tokens.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if in_str:
        raise ValueError("unterminated string literal")
    if cur:
        tokens.append("".join(cur))
    return tokens


def strip_comment(line: str) -> str:
    in_str = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_str = not in_str
        elif ch == "#" and not in_str:
            return line[:i]
    return line


def normalize_tree_path(raw: str) -> str:
    """Normalize a ``/``-separated tree-relative path; ``ValueError`` if illegal."""
    if raw.startswith("/") or raw.startswith("\\"):
        raise ValueError(f"path {raw!r} must be relative to the tree root")
    parts = [p for p in raw.split("/") if p not in ("", ".")]
    if not parts:
        raise ValueError(f"empty path {raw!r}")
    for p in parts:
        if p == "..":
            raise ValueError(f"path {raw!r} may not contain '..'")
        if not _PATH_PART.match(p):
            raise ValueError(f"illegal path component {p!r}")
    return "/".join(parts)


def parse_literal(text: str, ptype: ParamType) -> Value:
    """Parse a Config literal of the given type (``ValueError`` on mismatch)."""
    if ptype is ParamType.INTEGER:
        if _INT_LIT.match(text):
            return int(text)
    elif ptype is ParamType.REAL:
        if _REAL_LIT.match(text):
            value = float(text)
            if math.isfinite(value):
                return value
    elif ptype is ParamType.BOOLEAN:
        if text in ("TRUE", "FALSE"):
            return text == "TRUE"
    elif ptype is ParamType.STRING:
        if _STR_LIT.match(text):
            return text[1:-1]
    raise ValueError(f"{text!r} is not a valid {ptype.value} literal")


def parse_runtime_value(text: str, ptype: ParamType) -> Value:
    """Parfile values: Config literals, plus bare (unquoted) strings."""
    if ptype is ParamType.STRING and not text.startswith('"'):
        if '"' in text:
            raise ValueError(f"{text!r} is not a valid STRING value")
        return text
    return parse_literal(text, ptype)


def render_literal(value: Value, ptype: ParamType) -> str:
    if ptype is ParamType.BOOLEAN:
        return "TRUE" if value else "FALSE"
    if ptype is ParamType.STRING:
        return f'"{value}"'
    if ptype is ParamType.REAL:
        return repr(float(value))
    return str(int(value))


# -- Config ------------------------------------------------------------------------


def _parse_directive(tokens: list[str]) -> Directive:
    kw, args = tokens[0], tokens[1:]

    def want(n: int) -> None:
        if len(args) != n:
            raise ValueError(f"{kw} takes {n} operand{'s' if n != 1 else ''}, got {len(args)}")

    if kw in ("REQUIRES", "REQUESTS"):
        want(1)
        target = normalize_tree_path(args[0])
        return Requires(target) if kw == "REQUIRES" else Requests(target)
    if kw == "DEFAULT":
        want(1)
        if not _IDENT.match(args[0]):
            raise ValueError(f"DEFAULT expects a directory name, got {args[0]!r}")
        return Default(args[0])
    if kw == "PARAMETER":
        want(3)
        name, tname, lit = args
        if not _IDENT.match(name):
            raise ValueError(f"bad parameter name {name!r}")
        try:
            ptype = ParamType(tname)
        except ValueError:
            raise ValueError(f"unknown parameter type {tname!r}") from None
        return Parameter(name, ptype, parse_literal(lit, ptype))
    if kw == "VARIABLE":
        want(1)
        if not _VARNAME.match(args[0]):
            raise ValueError(f"variable names are lowercase identifiers, got {args[0]!r}")
        return Variable(args[0])
    raise ValueError(f"unknown keyword {kw!r}")


def parse_config(text: str, dir_path: str = "") -> ConfigFile:
    """Parse the contents of a ``Config`` file living in ``dir_path``."""
    file_path = f"{dir_path}/{CONFIG_FILENAME}" if dir_path else CONFIG_FILENAME
    directives: list[Directive] = []
    lines: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            tokens = tokenize(raw)
            if not tokens:
                continue
            directives.append(_parse_directive(tokens))
        except ValueError as exc:
            raise ConfigSyntaxError(str(exc), file_path, lineno) from None
        lines.append(lineno)

    for kind in (Parameter, Variable):
        seen: dict[str, list[int]] = {}
        for d, ln in zip(directives, lines):
            if isinstance(d, kind):
                seen.setdefault(d.name, []).append(ln)
        for name, where in seen.items():
            if len(where) > 1:
                raise DuplicateDeclaration(name, tuple(where), file_path)

    return ConfigFile(dir_path, tuple(directives), tuple(lines))


def render_directive(d: Directive) -> str:
    if isinstance(d, Requires):
        return f"REQUIRES {d.target}"
    if isinstance(d, Requests):
        return f"REQUESTS {d.target}"
    if isinstance(d, Default):
        return f"DEFAULT {d.child}"
    if isinstance(d, Parameter):
        return f"PARAMETER {d.name} {d.ptype.value} {render_literal(d.default, d.ptype)}"
    if isinstance(d, Variable):
        return f"VARIABLE {d.name}"
    raise TypeError(f"not a directive: {d!r}")


def render_config(cfg: ConfigFile) -> str:
    return "".join(render_directive(d) + "\n" for d in cfg.directives)


def read_config(file: Path, dir_path: str) -> ConfigFile:
    return parse_config(file.read_text(encoding="utf-8"), dir_path)


# -- parfile -------------------------------------------------------------------------


def parse_parfile(text: str, source: str = "parfile") -> ParFile:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = strip_comment(raw)
        if not body.strip():
            continue
        m = _PAR_LINE.match(body)
        if m is None:
            raise ConfigSyntaxError("expected 'name = value'", source, lineno)
        entries.append((m.group(1), m.group(2), lineno))
    return ParFile(tuple(entries), source)


def read_parfile(path: Path) -> ParFile:
    return parse_parfile(Path(path).read_text(encoding="utf-8"), str(path))
