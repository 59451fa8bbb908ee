#
# Project grappa - Copyright 2026 The grappa authors.
# SPDX-License-Identifier: Apache-2.0
#

"""Vapor-pressure prediction with a hybrid graph attention network."""

import json
from typing import NamedTuple, Optional

from . import _core
from ._core import (
    CheckpointError,
    DomainError,
    SmilesError,
    ape_i,
    featurize,
    robust_antoine_fit,
)

__all__ = [
    "Antoine",
    "CheckpointError",
    "DomainError",
    "Model",
    "SmilesError",
    "ape_i",
    "evaluate",
    "featurize",
    "robust_antoine_fit",
    "train",
]


class Antoine(NamedTuple):
    """Antoine parameters for ln(p / kPa) = A - B / (T / K + C)."""

    A: float
    B: float
    C: float

    def ln_p_kpa(self, temperature_k: float) -> float:
        return _core.ln_vapor_pressure(*self, temperature_k)

    def p_pa(self, temperature_k: float) -> float:
        return _core.vapor_pressure_pa(*self, temperature_k)

    def boiling_k(self, pressure_pa: float = 101325.0) -> float:
        return _core.boiling_temperature(*self, pressure_pa)


class Model:
    """Graph attention model mapping a SMILES string to Antoine parameters."""

    def __init__(self, arch: Optional[dict] = None, seed: int = 0, *, _native=None):
        self._m = _native or _core.Model(json.dumps(arch or {}), seed)

    @classmethod
    def load(cls, path: str) -> "Model":
        return cls(_native=_core.Model.load(str(path)))

    def save(self, path: str) -> None:
        self._m.save(str(path))

    @property
    def num_parameters(self) -> int:
        return self._m.num_parameters

    @property
    def arch(self) -> dict:
        return json.loads(self._m.arch_json())

    def accounting_markdown(self) -> str:
        return self._m.accounting_markdown()

    def predict(self, smiles: str) -> Antoine:
        return Antoine(*self._m.predict(smiles))

    def attention_scores(self, smiles: str) -> list:
        return self._m.attention_scores(smiles)


def train(model: Model, data_path: str, config: Optional[dict] = None) -> str:
    """Trains in place on the train/valid split column; returns history CSV."""
    return _core.train(model._m, str(data_path), json.dumps(config or {}))


def evaluate(model: Model, data_path: str, split: str = "test") -> dict:
    return json.loads(_core.evaluate(model._m, str(data_path), split))
