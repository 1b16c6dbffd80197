import copy
from pathlib import Path

import pytest

from ada.fixtures import ferry_factors, ferry_model, ferry_model_dict
from ada.schema import model_from_dict

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.fixture(scope="session")
def ferry():
    return ferry_model()


@pytest.fixture
def ferry_dict():
    return ferry_model_dict()


@pytest.fixture(scope="session")
def factors():
    return ferry_factors()


def clause_entry(data, clause_id):
    """Mutable clause dict inside a model dict (leaf or composite)."""
    comps = list(data["components"]) + [data["composite"]]
    for comp in comps:
        for section in ("assumptions", "guarantees"):
            for clause in comp["contract"][section]:
                if clause["id"] == clause_id:
                    return clause
    raise KeyError(clause_id)


def mutate(data, fn):
    data = copy.deepcopy(data)
    fn(data)
    return model_from_dict(data)
