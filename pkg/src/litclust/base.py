"""Estimator base class and input validation helpers.

The estimators in this package follow the scikit-learn parameter
conventions (``get_params`` / ``set_params``, constructor args stored
verbatim as attributes) without depending on scikit-learn itself, so
they drop into sklearn pipelines and grid-search tooling when that
library is around.
"""

from __future__ import annotations

import inspect

import numpy as np

from litclust.errors import ConfigError


class BaseEstimator:
    """Parameter introspection identical in spirit to sklearn's BaseEstimator.

    Subclasses must store every constructor argument under the same name
    (``self.foo = foo``) and do no work in ``__init__``.
    """

    @classmethod
    def _param_names(cls) -> list[str]:
        sig = inspect.signature(cls.__init__)
        return [
            name
            for name, p in sig.parameters.items()
            if name != "self" and p.kind != p.VAR_KEYWORD
        ]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for name, value in params.items():
            if name not in valid:
                raise ConfigError(
                    f"invalid parameter {name!r} for {type(self).__name__}; "
                    f"valid parameters are {sorted(valid)}"
                )
            setattr(self, name, value)
        return self

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in sorted(self.get_params().items()))
        return f"{type(self).__name__}({args})"


def check_vectors(x, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array of finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ConfigError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise ConfigError(f"{name} has no rows")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite values")
    return arr


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_bounds(value, name: str, lo, hi, enforce: bool = True):
    """Range check used for the documented parameter bounds.

    ``enforce=False`` turns the check into a no-op so callers can opt
    out of the bounds deliberately.
    """
    if enforce and not (lo <= value <= hi):
        raise ConfigError(
            f"{name}={value} outside the supported range [{lo}, {hi}]; "
            f"pass the override flag to use it anyway"
        )
    return value
