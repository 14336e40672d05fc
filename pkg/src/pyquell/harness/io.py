import json
import pandas as pd
from pathlib import Path
from typing import Iterable, Sequence
from pydantic import BaseModel

# Plain comma-separated files with a header row and '.' decimals
_CSV_OPTIONS = dict(index=False, lineterminator='\n')

def _as_records(rows: Iterable[BaseModel | dict]) -> list[dict]:
    return [row.model_dump() if isinstance(row, BaseModel) else dict(row) for row in rows]

def write_csv(path: Path, rows: Iterable[BaseModel | dict], columns: Sequence[str]) -> Path:
    frame = pd.DataFrame(_as_records(rows), columns=list(columns))
    frame.to_csv(path, **_CSV_OPTIONS)
    return Path(path)

def write_json(path: Path, model: BaseModel) -> Path:
    with open(path, 'w') as f:
        json.dump(model.model_dump(mode='json'), f, indent=4)
    return Path(path)

class CsvLog:
    """Append-only CSV: the header is written on creation, one flush per row."""

    def __init__(self, path: Path, columns: Sequence[str]):
        self.path = Path(path)
        self.columns = list(columns)
        pd.DataFrame(columns=self.columns).to_csv(self.path, **_CSV_OPTIONS)

    def append(self, row: BaseModel | dict) -> None:
        frame = pd.DataFrame(_as_records([row]), columns=self.columns)
        frame.to_csv(self.path, mode='a', header=False, **_CSV_OPTIONS)
