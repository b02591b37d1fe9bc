"""Prescribed-energy curves for concave-convex p-Laplacian problems."""

import json

from ._core import (
    ConfigError,
    DomainError,
    Error,
    NumericalError,
    classify_and_solve,
    csv_header,
    extremal_pair,
    fibering_value,
    zero_level_pair,
)
from ._core import _Experiment

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "Experiment",
    "NumericalError",
    "classify_and_solve",
    "csv_header",
    "extremal_pair",
    "fibering_value",
    "zero_level_pair",
]


class Experiment:
    """A discretized instance built from an experiment config (dict or JSON path).

    Reports come back as plain dicts with the same layout as report.json,
    without the timing block.
    """

    def __init__(self, config):
        if isinstance(config, dict):
            text = json.dumps(config)
        else:
            with open(config, encoding="utf-8") as fh:
                text = fh.read()
        self._impl = _Experiment(text)

    @property
    def dim(self):
        return self._impl.dim

    @property
    def config(self):
        return json.loads(self._impl.config())

    def thresholds(self):
        return json.loads(self._impl.thresholds())

    def solve(self, c, branch="plus", k=1):
        return json.loads(self._impl.solve(c, branch, k))

    def trace(self):
        return json.loads(self._impl.trace())

    def trace_csv(self):
        return self._impl.trace_csv()

    def verify(self):
        return json.loads(self._impl.verify())

    def evaluate(self, u):
        return self._impl.evaluate(list(map(float, u)))

    def phi(self, lam, u):
        return self._impl.phi(lam, list(map(float, u)))

    def phi_grad(self, lam, u):
        return self._impl.phi_grad(lam, list(map(float, u)))

    def lambda_of(self, c, u):
        return self._impl.lambda_of(c, list(map(float, u)))
