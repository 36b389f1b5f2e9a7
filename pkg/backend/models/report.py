"""
Bound rows and reports: measured quantities next to the inequality they must satisfy.
Every row is normalized to the form lhs <= rhs + slack.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundRow:
    name: str
    lhs_bits: float
    rhs_bits: float
    slack: float = 0.0
    note: str = ''

    @property
    def passed(self) -> bool:
        return self.lhs_bits <= self.rhs_bits + self.slack

    @property
    def slack_used(self) -> float:
        """How much of the slack the row needed (0 when lhs <= rhs already)."""
        return max(0.0, self.lhs_bits - self.rhs_bits)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'lhs_bits': float(self.lhs_bits),
            'rhs_bits': float(self.rhs_bits),
            'slack': float(self.slack),
            'slack_used': float(self.slack_used),
            'pass': self.passed,
            'note': self.note,
        }


@dataclass
class Report:
    title: str
    rows: List[BoundRow] = field(default_factory=list)
    stats: Dict[str, object] = field(default_factory=dict)

    def add(self, name, lhs, rhs, slack=0.0, note='') -> BoundRow:
        row = BoundRow(name, float(lhs), float(rhs), float(slack), note)
        if not row.passed:
            logger.warning('%s: bound %s failed (%.6f > %.6f + %.6f)',
                           self.title, name, row.lhs_bits, row.rhs_bits, row.slack)
        self.rows.append(row)
        return row

    def extend(self, other: 'Report') -> 'Report':
        self.rows.extend(other.rows)
        return self

    def row(self, name: str) -> Optional[BoundRow]:
        for row in self.rows:
            if row.name == name:
                return row
        return None

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def failures(self) -> List[BoundRow]:
        return [row for row in self.rows if not row.passed]

    def to_dict(self) -> dict:
        return {
            'title': self.title,
            'stats': dict(self.stats),
            'rows': [row.to_dict() for row in self.rows],
        }
