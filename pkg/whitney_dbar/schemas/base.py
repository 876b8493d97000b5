from pathlib import Path
from typing import ClassVar, Generic, TypeVar

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict


class RecordBaseModel(BaseModel):
    """
    Schema for base records (report rows, specs, manifest entries)
    """

    model_config = ConfigDict(
        populate_by_name=True,
        from_attributes=True,
        frozen=True,
    )


class ArrayBaseModel(BaseModel):
    """
    Base for immutable domain values carrying numpy arrays.

    Arrays are made read-only by the subclasses' validators.
    """

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
    )


def readonly(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.flags.writeable = False
    return array


T = TypeVar("T", bound=RecordBaseModel)


class TableBaseModel(BaseModel, Generic[T]):
    """
    Schema for tabular results written as CSV
    """

    CSV_COLUMNS: ClassVar[tuple[str, ...]] = ()

    rows: list[T]

    model_config = ConfigDict(populate_by_name=True, from_attributes=True)

    def flat(self) -> list[dict]:
        return [row.model_dump(by_alias=True) for row in self.rows]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.flat())
        if frame.empty:
            return pd.DataFrame(columns=list(self.CSV_COLUMNS))
        return frame.loc[:, list(self.CSV_COLUMNS)]

    def to_csv(self, path: Path | None = None) -> str:
        text = self.to_frame().to_csv(index=False, na_rep="", lineterminator="\n")
        if path is not None:
            path.write_text(text)
        return text
