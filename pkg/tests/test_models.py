import json

import numpy as np
import pytest
from pydantic import ValidationError

from emdapprox import REPORT_SCHEMA_VERSION
from emdapprox.models import CommandEnum, ModeEnum, MwuParamsModel, RunConfig, RunReport, to_builtin
from emdapprox.solver import compute_params


def test_run_config_defaults():
    config = RunConfig(command="approx")
    assert config.command == CommandEnum.APPROX
    assert config.mode == ModeEnum.PRACTICAL
    assert config.eps == 0.25 and config.phi_exp == 0.5
    assert config.sizes == [16, 32]
    assert config.timings


@pytest.mark.parametrize("field, value", [
    ("eps", 0.5), ("eps", -0.1), ("phi_exp", 1.0), ("seed", -1), ("sizes", [1, 8]),
    ("trials", 0), ("oracle", "lsh"), ("command", "solve"),
])
def test_run_config_rejects(field, value):
    args = {"command": "exact", field: value}
    with pytest.raises(ValidationError):
        RunConfig(**args)


def test_to_builtin_handles_numpy_and_non_finite():
    value = {
        1: np.int64(3),
        "f": np.float32(0.5),
        "nan": float("nan"),
        "inf": np.inf,
        "arr": np.array([[1, 2]]),
        "flag": np.bool_(True),
        "mode": ModeEnum.FAITHFUL,
        "nested": ({"x": np.float64(-np.inf)},),
    }
    out = to_builtin(value)
    assert out == {
        "1": 3, "f": 0.5, "nan": None, "inf": None, "arr": [[1, 2]], "flag": True,
        "mode": "faithful", "nested": [{"x": None}],
    }
    json.dumps(out)


def test_report_json_is_sorted_and_drops_empty_timings():
    report = RunReport(command=CommandEnum.EXACT, result={"emd": np.float64(3.0), "ratio": float("nan")})
    payload = json.loads(report.to_json())
    assert payload["schema"] == REPORT_SCHEMA_VERSION
    assert "timings" not in payload
    assert payload["result"] == {"emd": 3.0, "ratio": None}
    assert list(payload) == sorted(payload)

    timed = RunReport(command="exact", timings={"total": 0.5})
    assert json.loads(timed.to_json())["timings"] == {"total": 0.5}


def test_params_model_accepts_schedule(defaults):
    params = compute_params(8, 16.0, 0.25, "practical", defaults=defaults)
    model = MwuParamsModel(**params.as_dict())
    assert model.mode == ModeEnum.PRACTICAL
    assert model.R == params.R
    assert to_builtin(model.model_dump())["mode"] == "practical"
