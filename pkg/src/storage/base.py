"""Key/bytes storage interface behind the null-table cache."""

from abc import ABC, abstractmethod


class StorageBackend(ABC):
    """
    Flat key -> bytes store.

    Keys are '/'-separated relative paths such as
    'vdw/n432_d2x2_gnone-none_B999_s2.txt'.
    """

    @abstractmethod
    def upload(self, key: str, data: bytes) -> str:
        """
        Store data under key, replacing any previous value.

        Returns:
            The key the data was stored under
        """

    @abstractmethod
    def download(self, key: str) -> bytes:
        """
        Raises:
            FileNotFoundError: If key is absent
        """

    @abstractmethod
    def exists(self, key: str) -> bool:
        ...

    @abstractmethod
    def delete(self, key: str) -> None:
        """Remove key; absent keys are ignored."""
