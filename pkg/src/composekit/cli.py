"""Command-line front end.

    composekit setup <Sim> [--with-unit P] [--without-unit P] [--unit-impl G=C] [--parfile F]
    composekit validate
    composekit explain <name> --sim <Sim> [setup flags]
    composekit list
    composekit enumerate <Unit>
    composekit test <suite> [--record]

Exit status: 0 clean, 1 validation errors, 2 usage or resolution errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .config_lang import read_parfile
from .emitter import explain
from .errors import ComposeError
from .pipeline import configure
from .resolver import SetupRequest, enumerate_valid_configurations, resolve
from .tree import DEFAULT_SRC_EXTS, list_simulations, scan_tree
from .validator import validate_all

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
TREE_ENV = "COMPOSEKIT_TREE"


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--tree", default=os.environ.get(TREE_ENV, "."), help="source tree root (default: $COMPOSEKIT_TREE or .)")
    p.add_argument("--objdir", default="object", help="output directory for manifests (default: object/)")
    p.add_argument("--src-ext", action="append", dest="src_ext", metavar="EXT", help="source file extension (repeatable, default .F90)")
    p.add_argument("--format", choices=("text", "machine"), default="text")
    return p


def _request_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--with-unit", action="append", default=[], metavar="PATH")
    p.add_argument("--without-unit", action="append", default=[], metavar="PATH")
    p.add_argument("--unit-impl", action="append", default=[], metavar="GROUP=CHILD")
    p.add_argument("--parfile", metavar="FILE")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="composekit", description="Compose one application from a unit source tree.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common, req = _common(), _request_flags()

    p = sub.add_parser("setup", parents=[common, req], help="resolve a simulation and write its manifest")
    p.add_argument("simulation")
    sub.add_parser("validate", parents=[common], help="run tree-wide architecture checks")
    p = sub.add_parser("explain", parents=[common, req], help="explain how a routine or parameter was chosen")
    p.add_argument("name")
    p.add_argument("--sim", required=True, help="simulation setup to explain against")
    sub.add_parser("list", parents=[common], help="list simulation setups")
    p = sub.add_parser("enumerate", parents=[common], help="enumerate implementation permutations of a unit")
    p.add_argument("unit")
    p = sub.add_parser("test", parents=[common], help="run a regression suite")
    p.add_argument("suite")
    p.add_argument("--record", action="store_true", help="rewrite baselines instead of checking them")
    return parser


def _impl_choices(items: list[str]) -> dict[str, str]:
    out = {}
    for item in items:
        group, sep, child = item.partition("=")
        if not sep or not group or not child:
            raise ValueError(f"--unit-impl expects GROUP=CHILD, got {item!r}")
        if group in out and out[group] != child:
            raise ValueError(f"--unit-impl gives two choices for {group}")
        out[group] = child
    return out


def _request(args, simulation: str) -> SetupRequest:
    return SetupRequest(
        simulation=simulation,
        with_units=tuple(args.with_unit),
        without_units=tuple(args.without_unit),
        impl_choices=_impl_choices(args.unit_impl),
        parfile=args.parfile,
    )


def _atomic_write(objdir: Path, files: dict[str, str]) -> None:
    objdir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=objdir, prefix=f".{name}.")
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            staged.append((tmp, objdir / name))
        for tmp, final in staged:
            os.replace(tmp, final)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)


def _print_report(report, fmt: str, out) -> None:
    out.write(report.to_records() if fmt == "machine" else report.to_text())


def _cmd_setup(args, out, err) -> int:
    request = _request(args, args.simulation)
    tree = scan_tree(args.tree, args.src_ext or DEFAULT_SRC_EXTS)
    result = configure(tree, request)
    _print_report(result.report, args.format, out)
    for w in result.init_order.warnings:
        print(f"composekit: warning: {w}", file=err)
    if result.report.has_errors:
        return EXIT_INVALID
    _atomic_write(Path(args.objdir), {"manifest.txt": result.text, "manifest.json": result.manifest.to_json()})
    nulls = sum(1 for c in result.files.values() if c.null)
    out.write(
        f"setup {request.simulation}: {len(result.files)} routines ({nulls} null), "
        f"{len(result.parameters)} parameters, {len(result.variables)} variables\n"
    )
    return EXIT_OK


def _cmd_validate(args, out, err) -> int:
    tree = scan_tree(args.tree, args.src_ext or DEFAULT_SRC_EXTS)
    report = validate_all(tree)
    _print_report(report, args.format, out)
    return EXIT_INVALID if report.has_errors else EXIT_OK


def _cmd_explain(args, out, err) -> int:
    request = _request(args, args.sim)
    tree = scan_tree(args.tree, args.src_ext or DEFAULT_SRC_EXTS)
    closure = resolve(tree, request)
    parfile = read_parfile(Path(args.parfile)) if args.parfile else None
    exp = explain(args.name, tree, closure, parfile)
    if args.format == "machine":
        out.write(json.dumps({
            "kind": exp.kind, "name": exp.name, "rule": exp.rule, "selected": exp.selected,
            "entries": [{"source": s, "detail": d} for s, d in exp.entries],
        }, sort_keys=True) + "\n")
    else:
        out.write(exp.to_text())
    return EXIT_OK


def _cmd_list(args, out, err) -> int:
    tree = scan_tree(args.tree, args.src_ext or DEFAULT_SRC_EXTS)
    sims = list_simulations(tree)
    out.write(json.dumps(sims) + "\n" if args.format == "machine" else "".join(s + "\n" for s in sims))
    return EXIT_OK


def _cmd_enumerate(args, out, err) -> int:
    tree = scan_tree(args.tree, args.src_ext or DEFAULT_SRC_EXTS)
    try:
        configs = enumerate_valid_configurations(tree, args.unit)
    except KeyError as exc:
        raise ValueError(exc.args[0]) from None
    if args.format == "machine":
        out.write(json.dumps({"count": len(configs), "configurations": configs}, sort_keys=True) + "\n")
    else:
        out.write(f"{len(configs)}\n")
        for c in configs:
            out.write(" ".join(f"{g}={v}" for g, v in c.items()) + "\n")
    return EXIT_OK


def _cmd_test(args, out, err) -> int:
    from .harness import load_suite, run_suite  # harness drives main(); import late to avoid a cycle

    suite = load_suite(Path(args.suite))
    report = run_suite(suite, "record" if args.record else "check")
    out.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_INVALID


COMMANDS = {
    "setup": _cmd_setup,
    "validate": _cmd_validate,
    "explain": _cmd_explain,
    "list": _cmd_list,
    "enumerate": _cmd_enumerate,
    "test": _cmd_test,
}


def main(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out, err)
    except (ComposeError, ValueError, OSError) as exc:
        print(f"composekit: error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
