"""SER records and their CSV / JSON files."""

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from scipy.stats import beta

from ..errors import InvalidArgumentError, ResultsIOError

CSV_COLUMNS = (
    "detector",
    "snr_db",
    "symbols",
    "symbol_errors",
    "ser",
    "vectors",
    "vector_errors",
    "ver",
    "seconds",
)
COUNT_COLUMNS = ("symbols", "symbol_errors", "vectors", "vector_errors")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class SerRecord:
    detector: str
    snr_db: float
    symbols: int
    symbol_errors: int
    vectors: int
    vector_errors: int
    seconds: float = 0.0

    def __post_init__(self):
        if not 0 <= self.symbol_errors <= self.symbols or not 0 <= self.vector_errors <= self.vectors:
            raise InvalidArgumentError(f"inconsistent counts in {self}")

    @property
    def ser(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else 0.0

    @property
    def ver(self) -> float:
        return self.vector_errors / self.vectors if self.vectors else 0.0

    def row(self) -> dict[str, object]:
        return {
            "detector": self.detector,
            "snr_db": repr(float(self.snr_db)),
            "symbols": self.symbols,
            "symbol_errors": self.symbol_errors,
            "ser": repr(self.ser),
            "vectors": self.vectors,
            "vector_errors": self.vector_errors,
            "ver": repr(self.ver),
            "seconds": repr(float(self.seconds)),
        }


@dataclass
class SerResult:
    records: list[SerRecord]
    config: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        by_snr: dict[float, set[int]] = {}
        for r in self.records:
            by_snr.setdefault(r.snr_db, set()).add(r.symbols)
        uneven = [snr for snr, totals in by_snr.items() if len(totals) > 1]
        if uneven:
            raise InvalidArgumentError(f"detectors saw different symbol totals at {uneven} dB")

    def record(self, detector: str, snr_db: float) -> SerRecord:
        for r in self.records:
            if r.detector == detector and r.snr_db == snr_db:
                return r
        raise KeyError(f"no record for {detector} at {snr_db} dB")

    def ser(self, detector: str, snr_db: float) -> float:
        return self.record(detector, snr_db).ser

    def interval(self, detector: str, snr_db: float, level: float = 0.95) -> tuple[float, float]:
        r = self.record(detector, snr_db)
        return clopper_pearson(r.symbol_errors, r.symbols, level)

    @property
    def detectors(self) -> list[str]:
        return list(dict.fromkeys(r.detector for r in self.records))

    @property
    def snr_points(self) -> list[float]:
        return list(dict.fromkeys(r.snr_db for r in self.records))


def clopper_pearson(errors: int, total: int, level: float = 0.95) -> tuple[float, float]:
    """Exact two-sided binomial interval for errors / total."""
    if total <= 0 or not 0 <= errors <= total:
        raise InvalidArgumentError(f"need 0 <= errors <= total and total > 0, got {errors}/{total}")
    if not 0 < level < 1:
        raise InvalidArgumentError(f"level must lie in (0, 1), got {level}")
    tail = (1.0 - level) / 2.0
    lower = 0.0 if errors == 0 else float(beta.ppf(tail, errors, total - errors + 1))
    upper = 1.0 if errors == total else float(beta.ppf(1.0 - tail, errors + 1, total - errors))
    return lower, upper


def format_csv(result: SerResult) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in result.records:
        writer.writerow(r.row())
    return buffer.getvalue()


def format_json(result: SerResult) -> str:
    payload = {
        "seed": (result.config or {}).get("seed"),
        "config": result.config,
        "records": [{**asdict(r), "ser": r.ser, "ver": r.ver} for r in result.records],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_results(result: SerResult, path: str | Path, format: str = "csv") -> Path:
    if format not in FORMATS:
        raise InvalidArgumentError(f"unknown results format {format}")
    path = Path(path)
    text = format_csv(result) if format == "csv" else format_json(result)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ResultsIOError(f"cannot write results to {path}: {e}") from e
    return path


def read_results(path: str | Path, format: str | None = None) -> SerResult:
    path = Path(path)
    format = format or ("json" if path.suffix == ".json" else "csv")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ResultsIOError(f"cannot read results from {path}: {e}") from e
    try:
        if format == "json":
            payload = json.loads(text)
            records = [
                SerRecord(**{k: v for k, v in item.items() if k not in ("ser", "ver")})
                for item in payload["records"]
            ]
            return SerResult(records, config=payload.get("config"))
        rows = list(csv.DictReader(io.StringIO(text)))
        return SerResult([_record_from_row(row) for row in rows])
    except (KeyError, ValueError, TypeError) as e:
        raise ResultsIOError(f"malformed results file {path}: {e}") from e


def _record_from_row(row: dict[str, str]) -> SerRecord:
    return SerRecord(
        detector=row["detector"],
        snr_db=float(row["snr_db"]),
        seconds=float(row["seconds"]),
        **{key: int(row[key]) for key in COUNT_COLUMNS},
    )
