"""Report profiles: the input of every mechanism.

A profile consists of the seller's neighbor set, an optional externally
trusted set, and one report per buyer.  A report carries the buyer's bid
and the set of identities she diffuses the sale to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .money import Money, format_money, parse_money

VertexId = str


class ProfileError(ValueError):
    """Raised when a profile is structurally invalid."""


@dataclass(frozen=True)
class Report:
    bid: Money
    diffuse: frozenset[VertexId]


@dataclass(frozen=True)
class ReportProfile:
    seller: VertexId
    seller_neighbors: frozenset[VertexId]
    gamma0: frozenset[VertexId]
    reports: Mapping[VertexId, Report]

    def __post_init__(self) -> None:
        if self.seller in self.reports:
            raise ProfileError(f"seller {self.seller!r} must not carry a report")
        for nb in sorted(self.seller_neighbors):
            if nb == self.seller:
                raise ProfileError("seller cannot be her own neighbor")
            if nb not in self.reports:
                raise ProfileError(f"seller neighbor {nb!r} has no report")
        for vid, report in self.reports.items():
            if report.bid < 0:
                raise ProfileError(f"buyer {vid!r} has a negative bid")
            for target in sorted(report.diffuse):
                if target != self.seller and target not in self.reports:
                    raise ProfileError(
                        f"buyer {vid!r} diffuses to unknown identity {target!r}"
                    )
        for vid in sorted(self.gamma0):
            if vid != self.seller and vid not in self.reports:
                raise ProfileError(f"trusted identity {vid!r} has no report")

    @property
    def buyers(self) -> tuple[VertexId, ...]:
        return tuple(sorted(self.reports))

    def bid(self, vid: VertexId) -> Money:
        return self.reports[vid].bid

    def with_reports(self, updates: Mapping[VertexId, Report]) -> "ReportProfile":
        merged = dict(self.reports)
        merged.update(updates)
        return ReportProfile(self.seller, self.seller_neighbors, self.gamma0, merged)


def build_profile(
    seller: VertexId,
    seller_neighbors: Iterable[VertexId],
    reports: Mapping[VertexId, tuple[Money | str | int, Iterable[VertexId]]],
    gamma0: Iterable[VertexId] = (),
) -> ReportProfile:
    """Convenience constructor accepting plain builtins."""
    table = {
        vid: Report(parse_money(bid), frozenset(diffuse))
        for vid, (bid, diffuse) in reports.items()
    }
    return ReportProfile(
        seller=seller,
        seller_neighbors=frozenset(seller_neighbors),
        gamma0=frozenset(gamma0),
        reports=table,
    )


def profile_from_dict(doc: dict) -> ReportProfile:
    try:
        seller = doc["seller"]
        neighbors = doc["seller_neighbors"]
        reports = doc["reports"]
    except KeyError as exc:
        raise ProfileError(f"profile document missing key {exc.args[0]!r}") from None
    gamma0 = doc.get("gamma0", [])
    table: dict[VertexId, Report] = {}
    for entry in reports:
        try:
            vid = entry["id"]
            bid = parse_money(entry["bid"])
            diffuse = frozenset(entry.get("diffuse", []))
        except KeyError as exc:
            raise ProfileError(f"report missing key {exc.args[0]!r}") from None
        except ValueError as exc:
            raise ProfileError(f"report {entry.get('id')!r}: {exc}") from None
        if vid in table:
            raise ProfileError(f"duplicate report for {vid!r}")
        table[vid] = Report(bid, diffuse)
    return ReportProfile(
        seller=seller,
        seller_neighbors=frozenset(neighbors),
        gamma0=frozenset(gamma0),
        reports=table,
    )


def profile_to_dict(profile: ReportProfile) -> dict:
    return {
        "seller": profile.seller,
        "seller_neighbors": sorted(profile.seller_neighbors),
        "gamma0": sorted(profile.gamma0),
        "reports": [
            {
                "id": vid,
                "bid": format_money(profile.reports[vid].bid),
                "diffuse": sorted(profile.reports[vid].diffuse),
            }
            for vid in sorted(profile.reports)
        ],
    }


def load_profile(path: str) -> ReportProfile:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"{path}: malformed JSON ({exc})") from None
    return profile_from_dict(doc)


def dump_profile(profile: ReportProfile, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(profile_to_dict(profile), handle, indent=2)
        handle.write("\n")
