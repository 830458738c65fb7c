"""
Function to options
-------------------

Reads a registered algorithm's signature (through defopt, so docstring entries are
attached to parameters) to know which options it takes and what they default to.
"""
import inspect
import re
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

from defopt import Parameter, _parse_docstring, signature

from .models import PreconditionError


@dataclass
class Option:
    name: str
    default: Any
    doc: str = ""

    @property
    def required(self) -> bool:
        return self.default is Parameter.empty


@dataclass
class _Function:
    func: callable
    name: str
    doc: str
    options: Dict[str, Option] = field(default_factory=dict)

    @classmethod
    def from_function(cls, func, *, name):
        sig = signature(func)
        options = {
            p.name: Option(p.name, p.default, (getattr(p, "doc", None) or "").strip())
            for p in sig.parameters.values()
            if p.kind == Parameter.KEYWORD_ONLY
        }
        doc = re.sub("\n+", "\n", _parse_docstring(inspect.getdoc(func)).text)
        return cls(func=func, name=name, doc=doc, options=options)

    def accepted(self, values: Mapping[str, Any]) -> Dict[str, Any]:
        """The subset of ``values`` this function takes as options."""
        return {k: v for k, v in values.items() if k in self.options}

    def check(self, values: Mapping[str, Any]) -> None:
        unknown = sorted(set(values) - set(self.options))
        if unknown:
            raise PreconditionError(f"{self.name} does not take options {unknown}")
        missing = [o.name for o in self.options.values() if o.required and o.name not in values]
        if missing:
            raise PreconditionError(f"{self.name} requires options {missing}")
