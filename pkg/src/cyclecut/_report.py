from __future__ import annotations

import json
import warnings

SCHEMA_VERSION = "1.0.0"


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def check_schema(report: dict, expected: str = SCHEMA_VERSION) -> bool:
    """Warn (and return False) when a stored report has a different schema."""
    found = report.get("schema_version")
    if found != expected:
        warnings.warn(f"report schema {found!r} differs from {expected!r}", stacklevel=2)
        return False
    return True
