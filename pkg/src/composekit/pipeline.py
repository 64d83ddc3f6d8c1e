"""Scan-to-manifest in one call."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .arbitrator import (
    FileChoice,
    InitOrder,
    ParamEntry,
    assign_variable_indices,
    compute_init_order,
    merge_parameters,
    select_implementations,
)
from .config_lang import ParFile, read_parfile
from .emitter import Manifest, emit_manifest
from .resolver import SetupRequest, UnitClosure, resolve
from .tree import UnitTree
from .validator import ValidationReport, validate_all


@dataclass(frozen=True)
class SetupResult:
    """Everything one setup produced.

    When the closure fails validation only ``closure`` and ``report`` are
    filled in; the rest stays empty and no manifest exists.
    """

    closure: UnitClosure
    report: ValidationReport
    files: dict[str, FileChoice] = field(default_factory=dict)
    parameters: dict[str, ParamEntry] = field(default_factory=dict)
    variables: dict[str, int] = field(default_factory=dict)
    init_order: InitOrder = InitOrder(())
    manifest: Manifest | None = None
    text: str = ""


def configure(tree: UnitTree, request: SetupRequest, parfile: ParFile | None = None) -> SetupResult:
    if parfile is None and request.parfile:
        parfile = read_parfile(Path(request.parfile))
    closure = resolve(tree, request)
    report = validate_all(tree, closure)
    if report.has_errors:
        return SetupResult(closure, report)
    files = select_implementations(tree, closure)
    params = merge_parameters(tree, closure, parfile)
    variables = assign_variable_indices(tree, closure)
    order = compute_init_order(tree, closure)
    manifest, text = emit_manifest(files, params, variables, order, request, closure.dropped)
    return SetupResult(closure, report, files, params, variables, order, manifest, text)
