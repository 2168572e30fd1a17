import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import pandas as pd

from ..utils.errors import ValidationError

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["run_id", "method", "seed", "iteration", "node_index", "signature", "objective", "best_so_far"]


@dataclass
class TraceRow:
    iteration: int
    node_index: int
    signature: str
    objective: float
    best_so_far: float


@dataclass
class RunTrace:
    # Core Info
    method: str
    seed: int

    rows: List[TraceRow] = field(default_factory=list)
    # set when the run stopped on reaching its stop value
    stopped_early: bool = False

    @property
    def run_id(self) -> str:
        return f"{self.method}-{self.seed}"

    @property
    def best(self) -> float:
        return self.rows[-1].best_so_far if self.rows else float("inf")

    def record(self, node_index: int, signature: str, objective: float) -> TraceRow:
        row = TraceRow(
            iteration=len(self.rows),
            node_index=node_index,
            signature=signature,
            objective=objective,
            best_so_far=min(self.best, objective),
        )
        self.rows.append(row)
        return row

    def queried(self) -> List[int]:
        return [row.node_index for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        records = [{"run_id": self.run_id, "method": self.method, "seed": self.seed, **asdict(row)} for row in self.rows]
        return pd.DataFrame.from_records(records, columns=TRACE_COLUMNS)


def traces_to_frame(traces: List[RunTrace]) -> pd.DataFrame:
    frames = [trace.to_frame() for trace in traces]
    if not frames:
        return pd.DataFrame(columns=TRACE_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def save_traces(traces: List[RunTrace], path: str):
    traces_to_frame(traces).to_csv(path, index=False, float_format="%.17g")
    logger.info(f"{len(traces)} run traces saved to {path}")


def load_traces(path: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (FileNotFoundError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ValidationError(f"Could not read trace file {path}: {e}") from e
    missing = [column for column in TRACE_COLUMNS if column not in frame.columns]
    if missing:
        raise ValidationError(f"Trace file {path} is missing columns {missing}")
    return frame


@dataclass
class ObjectiveTable:
    values: Dict[str, float]
    truth: Optional[str] = None
    seed: Optional[int] = None
    latent_digest: Optional[str] = None
    pad_euclidean: Optional[bool] = None

    def __post_init__(self):
        for signature, value in self.values.items():
            if not value >= 0:
                raise ValidationError(f"Objective value for {signature} must be a non-negative number, got {value}")
        if self.truth is not None and self.truth not in self.values:
            raise ValidationError(f"Truth signature {self.truth} has no value in the table")

    def to_json(self) -> dict:
        data = {"truth": self.truth, "seed": self.seed}
        if self.latent_digest is not None:
            data["latent_digest"] = self.latent_digest
        if self.pad_euclidean is not None:
            data["pad_euclidean"] = self.pad_euclidean
        data["values"] = dict(self.values)
        return data

    @staticmethod
    def from_json(data: dict) -> "ObjectiveTable":
        try:
            return ObjectiveTable(
                values={str(key): float(value) for key, value in data["values"].items()},
                truth=data.get("truth"),
                seed=data.get("seed"),
                latent_digest=data.get("latent_digest"),
                pad_euclidean=data.get("pad_euclidean"),
            )
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Malformed objective table: {e}") from e

    def save(self, path: str):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=4, ensure_ascii=False)
            f.write("\n")
        logger.info(f"Objective table with {len(self.values)} entries saved to {path}")

    @staticmethod
    def load(path: str) -> "ObjectiveTable":
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (FileNotFoundError, json.JSONDecodeError) as e:
            raise ValidationError(f"Could not read objective table {path}: {e}") from e
        return ObjectiveTable.from_json(data)
