"""Evaluation report model.

JSON field names (stable within a major version):

    precision, recall, f1        span scores in percent
    rho_u                        % propositions with a duplicated core label
    rho_o                        number of crossing argument-span pairs
    rho_f                        % scored propositions with an out-of-frame
                                 core argument, or null when no frames given
    propositions, sentences      corpus counts
    frame_scored, frame_skipped  propositions scored / skipped for rho_f
    per_label                    {label: {precision, recall, f1, support}}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

NA = "NA"


@dataclass
class LabelScore:
    precision: float
    recall: float
    f1: float
    support: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass
class EvalReport:
    """Span P/R/F1 plus the three structure-violation measurements."""

    precision: float
    recall: float
    f1: float
    rho_u: float
    rho_o: int
    rho_f: float | None
    propositions: int
    sentences: int
    frame_scored: int = 0
    frame_skipped: int = 0
    per_label: dict[str, LabelScore] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "rho_u": self.rho_u,
            "rho_o": self.rho_o,
            "rho_f": self.rho_f,
            "propositions": self.propositions,
            "sentences": self.sentences,
            "frame_scored": self.frame_scored,
            "frame_skipped": self.frame_skipped,
            "per_label": {k: v.to_dict() for k, v in sorted(self.per_label.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EvalReport:
        return cls(
            precision=data["precision"],
            recall=data["recall"],
            f1=data["f1"],
            rho_u=data["rho_u"],
            rho_o=data["rho_o"],
            rho_f=data.get("rho_f"),
            propositions=data["propositions"],
            sentences=data["sentences"],
            frame_scored=data.get("frame_scored", 0),
            frame_skipped=data.get("frame_skipped", 0),
            per_label={k: LabelScore(**v) for k, v in data.get("per_label", {}).items()},
        )

    def headline(self) -> dict[str, str]:
        """The six headline numbers formatted for display."""
        return {
            "P": f"{self.precision:.2f}",
            "R": f"{self.recall:.2f}",
            "F1": f"{self.f1:.2f}",
            "rho_u": f"{self.rho_u:.2f}",
            "rho_o": str(self.rho_o),
            "rho_f": NA if self.rho_f is None else f"{self.rho_f:.2f}",
        }

    def to_text(self, label_wise: bool = True) -> str:
        """Aligned plain-text table."""
        head = self.headline()
        width = max(len(v) for v in head.values()) + 2
        lines = [
            "".join(k.rjust(width) for k in head),
            "".join(v.rjust(width) for v in head.values()),
            f"propositions={self.propositions} sentences={self.sentences} "
            f"frame_scored={self.frame_scored} frame_skipped={self.frame_skipped}",
        ]
        if label_wise and self.per_label:
            name_width = max(len(k) for k in self.per_label) + 2
            lines.append("")
            lines.append(
                "label".ljust(name_width) + "P".rjust(8) + "R".rjust(8) + "F1".rjust(8)
                + "n".rjust(6)
            )
            for name in sorted(self.per_label):
                s = self.per_label[name]
                lines.append(
                    name.ljust(name_width) + f"{s.precision:8.2f}{s.recall:8.2f}{s.f1:8.2f}"
                    + f"{s.support:6d}"
                )
        return "\n".join(lines)
