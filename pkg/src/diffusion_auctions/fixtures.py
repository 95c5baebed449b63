"""Named example profiles shipped with the package.

``funnel`` / ``diamond``: the pair of four-buyer networks where the cluster
mechanism's revenue lands on either side of the diffusion baselines.
``bridge``: the bridge network hosting the classic fake-identity attacks on
the baselines.  ``osm``: the network where dropping suspects backfires.
"""

from __future__ import annotations

from importlib import resources

from .profile import ReportProfile, profile_from_dict

import json

NAMES = ("funnel", "diamond", "bridge", "osm")


def load(name: str) -> ReportProfile:
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(NAMES)}")
    path = resources.files("diffusion_auctions").joinpath(f"fixtures/{name}.json")
    return profile_from_dict(json.loads(path.read_text(encoding="utf-8")))
