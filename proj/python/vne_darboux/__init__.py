"""Darboux dressing of the nonlinear von Neumann equation."""

import json

from ._core import *  # noqa: F401,F403
from ._core import run_scenario as _run_scenario

__version__ = "0.1.0"


def run_config(config):
    """Run a scenario given as a dict or JSON text. The report and lock come back parsed."""
    text = config if isinstance(config, str) else json.dumps(config)
    out = _run_scenario(text)
    out["report"] = json.loads(out.pop("report_json"))
    out["lock"] = json.loads(out.pop("lock_json"))
    return out
