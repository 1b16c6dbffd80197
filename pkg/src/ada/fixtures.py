"""Bundled ferry case-study data."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .identification import CausalFactorRecord, factors_from_list
from .model import SystemModel
from .schema import load_json, model_from_dict

_DATA = resources.files("ada") / "data"

FERRY_MODEL_PATH = Path(str(_DATA / "ferry.json"))
FERRY_FACTORS_PATH = Path(str(_DATA / "ferry_factors.json"))


def ferry_model() -> SystemModel:
    return model_from_dict(load_json(FERRY_MODEL_PATH))


def ferry_model_dict() -> dict:
    return load_json(FERRY_MODEL_PATH)


def ferry_factors() -> list[CausalFactorRecord]:
    return factors_from_list(load_json(FERRY_FACTORS_PATH))
