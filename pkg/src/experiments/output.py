import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, TextIO

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """CSV token: floats with 17 significant digits, infinities as inf / -inf, booleans lower-case."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if value is None:
        return ""
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


@dataclass
class PipelineResult:
    name: str
    columns: Sequence[str]
    rows: List[Sequence[Any]] = field(default_factory=list)
    passed: bool = True
    report: List[str] = field(default_factory=list)
    derived: Dict[str, Any] = field(default_factory=dict)

    def add_row(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"Row of {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)

    def note(self, line: str) -> None:
        self.report.append(line)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def report_text(self) -> str:
        return "\n".join([f"{self.name}: {self.verdict}", *self.report]) + "\n"

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "columns": list(self.columns),
            "rows": [[format_value(v) for v in row] for row in self.rows],
            "report": self.report_text(),
            "derived": {k: format_value(v) for k, v in self.derived.items()},
        }


def write_csv(result: PipelineResult, stream: TextIO, echo: Sequence[str] = ()) -> None:
    """Config echo as '#' lines, then one header row, then the rows."""
    for line in echo:
        stream.write(f"# {line}\n")
    for key in sorted(result.derived):
        stream.write(f"# derived.{key} = {format_value(result.derived[key])}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([format_value(v) for v in row])


def write_result(result: PipelineResult, out_dir: Path, echo: Sequence[str] = ()) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{result.name}.csv"
    report_path = out_dir / f"{result.name}.txt"
    with csv_path.open("w", encoding="utf-8", newline="") as f:
        write_csv(result, f, echo)
    report_path.write_text(result.report_text(), encoding="utf-8")
    logger.info(f"Wrote {csv_path} and {report_path}")
    return {"csv": csv_path, "report": report_path}


def read_rows(path: Path) -> List[Dict[str, str]]:
    """Rows of a result file as dictionaries, skipping the '#' echo lines."""
    with Path(path).open("r", encoding="utf-8") as f:
        body = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(body))

