"""The whole chain on the b-translation of (F2, <a>): limit sets, discreteness,
the induced map q, cross-ratio distortion and the C-complex isomorphism."""
from __future__ import annotations

import json

from coarsekit.pipeline import dynamics_report
from coarsekit.serialize import jsonable

report = dynamics_report()
print(json.dumps(jsonable(report.to_json()["conclusions"]), indent=2))
print("pairing details:", jsonable({k: v for k, v in report.details["pairing"].items() if not isinstance(v, dict)}))
