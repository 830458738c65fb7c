"""Bucket elimination, mini-bucket elimination and simulated DPOP over flat bucket tables."""
from typing import TYPE_CHECKING, Dict, List, Optional

if TYPE_CHECKING:
    from .function_info import _Function


class _Registry:
    """Algorithm name -> entry point (with its options), shared by the CLI, bench and run records."""

    def __init__(self):
        self.algorithms: Dict[str, "_Function"] = {}

    @classmethod
    def get_registry(cls) -> "_Registry":
        return _default_registry

    def add(self, func, name: Optional[str] = None):
        from .function_info import _Function

        name = name or func.__name__
        known = self.algorithms.get(name)
        if known is None:
            known = self.algorithms[name] = _Function.from_function(func, name=name)
        elif known.func is not func:
            raise ValueError(f"Algorithm {name} already registered (as {known.func.__qualname__})")
        return known

    def get(self, name: str):
        return self.algorithms.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self.algorithms

    def names(self) -> List[str]:
        return sorted(self.algorithms)

    def clear(self) -> None:
        self.algorithms.clear()


_default_registry = _Registry()
get_registry = _Registry.get_registry
