"""composekit: compose one application from a unit/subunit source tree.

Typical use::

    from composekit import scan_tree, SetupRequest, configure

    tree = scan_tree("source")
    result = configure(tree, SetupRequest("Sedov"))
    print(result.text)
"""

__version__ = "0.1.0"

from .config_lang import ConfigFile, ParFile, parse_config, parse_parfile, render_config  # noqa: E402
from .tree import UnitTree, discover_api, list_simulations, scan_tree  # noqa: E402
from .resolver import SetupRequest, UnitClosure, enumerate_valid_configurations, resolve  # noqa: E402
from .arbitrator import (  # noqa: E402
    assign_variable_indices,
    compute_init_order,
    merge_parameters,
    select_implementations,
)
from .validator import ValidationReport, validate_all  # noqa: E402
from .emitter import Manifest, emit_manifest, explain, read_manifest  # noqa: E402
from .pipeline import SetupResult, configure  # noqa: E402

__all__ = [
    "ConfigFile",
    "Manifest",
    "ParFile",
    "SetupRequest",
    "SetupResult",
    "UnitClosure",
    "UnitTree",
    "ValidationReport",
    "assign_variable_indices",
    "compute_init_order",
    "configure",
    "discover_api",
    "emit_manifest",
    "enumerate_valid_configurations",
    "explain",
    "list_simulations",
    "merge_parameters",
    "parse_config",
    "parse_parfile",
    "read_manifest",
    "render_config",
    "resolve",
    "scan_tree",
    "select_implementations",
    "validate_all",
]
