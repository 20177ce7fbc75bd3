import json

import pytest
from pydantic import ValidationError

from _adapter_support import VECTORS_PATH
from mrgd_adapters.schemas import REQUEST_MODELS, RESPONSE_MODELS

MODELS = {**REQUEST_MODELS, **RESPONSE_MODELS}
VECTORS = json.loads(VECTORS_PATH.read_text())


def test_vector_file_covers_every_model():
    assert set(VECTORS) == set(MODELS)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_valid_vectors_accepted(name):
    for payload in VECTORS[name]["valid"]:
        MODELS[name].model_validate(payload)


@pytest.mark.parametrize("name", sorted(MODELS))
def test_invalid_vectors_rejected(name):
    for payload in VECTORS[name]["invalid"]:
        with pytest.raises(ValidationError):
            MODELS[name].model_validate(payload)


def test_generate_response_omits_absent_reason():
    model = RESPONSE_MODELS["generate_response"].model_validate(
        {"version": "mrgd/1", "candidates": []}
    )
    assert "reason" not in model.model_dump_wire()
    with_reason = RESPONSE_MODELS["generate_response"].model_validate(
        {"version": "mrgd/1", "candidates": [], "reason": "budget"}
    )
    assert with_reason.model_dump_wire()["reason"] == "budget"
