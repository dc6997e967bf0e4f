"""Check reports shared by the suite runners and the CLI."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class CheckItem:
    name: str
    status: str                 # "pass" | "fail" | "error"
    detail: dict | None = None
    seconds: float = 0.0

    def to_dict(self, strip_timing: bool = False) -> dict:
        out: dict = {"name": self.name, "status": self.status}
        if self.detail is not None:
            out["detail"] = self.detail
        if not strip_timing:
            out["seconds"] = round(self.seconds, 6)
        return out


@dataclass
class Report:
    title: str
    config: dict = field(default_factory=dict)
    items: list[CheckItem] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(item.status == "pass" for item in self.items)

    def add(self, name: str, passed: bool, detail: dict | None = None,
            seconds: float = 0.0) -> CheckItem:
        item = CheckItem(name, "pass" if passed else "fail", detail, seconds)
        self.items.append(item)
        return item

    def extend(self, other: "Report") -> None:
        self.items.extend(other.items)

    def first_failure(self) -> CheckItem | None:
        for item in self.items:
            if item.status != "pass":
                return item
        return None

    def to_dict(self, strip_timing: bool = False) -> dict:
        return {
            "title": self.title,
            "config": self.config,
            "ok": self.ok,
            "items": [i.to_dict(strip_timing) for i in self.items],
        }

    def to_json(self, strip_timing: bool = False) -> str:
        return json.dumps(self.to_dict(strip_timing), indent=2, sort_keys=True)
