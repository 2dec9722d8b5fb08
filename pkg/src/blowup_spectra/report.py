"""Machine-readable run reports.

Reports are JSON documents with an explicit schema version. Complex numbers and
numpy values are encoded so that a report survives a dump/load round trip.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from . import __version__

SCHEMA_VERSION = "1"


def _encode(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return {"__complex__": [float(obj.real), float(obj.imag)]}
    if isinstance(obj, np.ndarray):
        return [_encode(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        return _encode(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    return obj


def _decode(d):
    if set(d) == {"__complex__"}:
        re, im = d["__complex__"]
        return complex(re, im)
    return d


@dataclass
class Report:
    command: str
    inputs: dict
    results: dict
    timings: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION
    tool_version: str = __version__

    def to_json(self) -> str:
        return json.dumps(_encode(asdict(self)), indent=2, sort_keys=True, allow_nan=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text, object_hook=_decode)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {data.get('schema_version')!r}")
        return cls(**data)

    def normalized(self) -> "Report":
        """The report as it reads back from JSON (tuples become lists, numpy values plain)."""
        return Report.from_json(self.to_json())
