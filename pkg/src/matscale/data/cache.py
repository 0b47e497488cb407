"""In-memory caching of record sources across epochs."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Sequence

from matscale.data.records import MaterialRecord

logger = logging.getLogger(__name__)


class CachedDataset:
    """Record source that parses its backing dataset once and replays it.

    The first iteration materializes the records; later iterations yield the
    same objects in the same order without touching the source.
    """

    def __init__(self, source: Iterable[MaterialRecord]) -> None:
        self.source = source
        self._records: list[MaterialRecord] | None = None

    @property
    def is_loaded(self) -> bool:
        return self._records is not None

    def records(self) -> list[MaterialRecord]:
        if self._records is None:
            self._records = list(self.source)
            logger.info(f"Cached {len(self._records)} records")
        return self._records

    def __iter__(self) -> Iterator[MaterialRecord]:
        return iter(self.records())

    def __len__(self) -> int:
        if self._records is None and hasattr(self.source, "__len__"):
            return len(self.source)  # type: ignore[arg-type]
        return len(self.records())

    def __getitem__(self, index: int) -> MaterialRecord:
        return self.records()[index]

    def subset(self, indices: Sequence[int]) -> CachedDataset:
        records = self.records()
        return CachedDataset([records[i] for i in indices])

    def __repr__(self) -> str:
        return f"CachedDataset(source={self.source!r}, loaded={self.is_loaded})"


def cache(dataset: Iterable[MaterialRecord]) -> CachedDataset:
    """Wrap a record source so epoch iteration parses it at most once.

    Caching an already cached dataset returns it unchanged.

    Examples:
        >>> dataset = JsonlDataset("train.jsonl")
        >>> cached = cache(dataset)
        >>> first, second = list(cached), list(cached)
        >>> dataset.parse_passes
        1
    """
    if isinstance(dataset, CachedDataset):
        return dataset
    return CachedDataset(dataset)
