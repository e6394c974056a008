"""
RunTrace: Protokoll eines Simulationslaufs

Pro Runde: Fehler-Indikator, Label-Anfrage, exakter Fehler der eingesetzten
Hypothese und die kumulierten Zähler.
"""

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from shared.utils.errors import InvalidParameterError

CSV_HEADER = ["t", "mistake", "queried", "exact_error", "cum_mistakes", "cum_queries"]


def format_float(value: float) -> str:
    """Dezimaldarstellung ohne Locale und ohne Exponent."""
    return f"{value:.12f}"


@dataclass(frozen=True)
class RoundRecord:
    """Eine Zeile des Protokolls"""
    t: int
    mistake: int
    queried: int
    exact_error: float
    cum_mistakes: int
    cum_queries: int

    def to_row(self) -> List[str]:
        return [
            str(self.t),
            str(self.mistake),
            str(self.queried),
            format_float(self.exact_error),
            str(self.cum_mistakes),
            str(self.cum_queries),
        ]


@dataclass
class RunTrace:
    """Rundenprotokoll; mit gesetztem Horizont nimmt es höchstens `horizon` Runden auf."""
    horizon: Optional[int] = None
    records: List[RoundRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def is_full(self) -> bool:
        return self.horizon is not None and len(self.records) >= self.horizon

    def record(self, mistake: bool, queried: bool, exact_error: float) -> RoundRecord:
        if self.is_full:
            raise InvalidParameterError(f"Horizont {self.horizon} bereits erreicht")
        last = self.records[-1] if self.records else None
        rec = RoundRecord(
            t=len(self.records) + 1,
            mistake=int(bool(mistake)),
            queried=int(bool(queried)),
            exact_error=float(exact_error),
            cum_mistakes=(last.cum_mistakes if last else 0) + int(bool(mistake)),
            cum_queries=(last.cum_queries if last else 0) + int(bool(queried)),
        )
        self.records.append(rec)
        return rec

    @property
    def total_mistakes(self) -> int:
        return self.records[-1].cum_mistakes if self.records else 0

    @property
    def total_queries(self) -> int:
        return self.records[-1].cum_queries if self.records else 0

    def mistakes(self) -> np.ndarray:
        return np.array([r.mistake for r in self.records], dtype=int)

    def queries(self) -> np.ndarray:
        return np.array([r.queried for r in self.records], dtype=int)

    def errors(self) -> np.ndarray:
        return np.array([r.exact_error for r in self.records], dtype=float)

    def mistake_rate(self, start: int = 1, end: Optional[int] = None) -> float:
        """Fehlerrate über die Runden start..end (1-basiert, inklusive)."""
        end = len(self.records) if end is None else end
        if start < 1 or end < start or end > len(self.records):
            raise InvalidParameterError(f"Ungültiger Rundenbereich [{start}, {end}]")
        return float(self.mistakes()[start - 1 : end].mean())

    def query_rate(self, start: int = 1, end: Optional[int] = None) -> float:
        end = len(self.records) if end is None else end
        if start < 1 or end < start or end > len(self.records):
            raise InvalidParameterError(f"Ungültiger Rundenbereich [{start}, {end}]")
        return float(self.queries()[start - 1 : end].mean())

    def final_rate(self, fraction: float = 0.1) -> float:
        """Fehlerrate über die letzten ⌈fraction·T⌉ Runden."""
        if not self.records:
            return 0.0
        window = max(1, math.ceil(fraction * len(self.records)))
        return self.mistake_rate(len(self.records) - window + 1)

    def mean_error(self) -> float:
        return float(self.errors().mean()) if self.records else 0.0

    def to_csv_text(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.records:
            writer.writerow(rec.to_row())
        return buffer.getvalue()

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.to_csv_text(), encoding="utf-8")
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "RunTrace":
        """Liest eine geschriebene Trace-Datei und prüft die kumulierten Zähler."""
        trace = cls()
        with open(path, newline="", encoding="utf-8") as f:
            reader = csv.reader(f)
            header = next(reader)
            if header != CSV_HEADER:
                raise InvalidParameterError(f"Unerwarteter CSV-Header: {header}")
            for row in reader:
                rec = trace.record(int(row[1]) == 1, int(row[2]) == 1, float(row[3]))
                if rec.cum_mistakes != int(row[4]) or rec.cum_queries != int(row[5]):
                    raise InvalidParameterError(f"Inkonsistente Summen in Runde {row[0]}")
        return trace
