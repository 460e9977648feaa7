import json

import numpy as np
import pytest
from hypothesis import given

from postsel import EqualC1, EqualC3, Unequal3, make_instance, random_density, validate_measurement
from postsel import serialize as ser
from postsel.errors import ValidationError
from strategies import seeds


@given(seeds)
def test_instance_round_trip_bit_exact(seed):
    rho = random_density(3, 3, seed).matrix
    sigma = random_density(3, 2, seed + 1).matrix
    inst = make_instance(rho, sigma, 0.37)
    text = ser.dumps(ser.encode_instance(inst))
    back = ser.decode_instance(json.loads(text))
    assert np.array_equal(back.rho.matrix, inst.rho.matrix)
    assert np.array_equal(back.sigma.matrix, inst.sigma.matrix)
    assert back.p_rho == inst.p_rho and back.tolerances == inst.tolerances
    assert ser.dumps(ser.encode_instance(back)) == text


@given(seeds)
def test_measurement_round_trip_bit_exact(seed):
    a = random_density(3, 2, seed).matrix * 0.4
    b = random_density(3, 1, seed + 7).matrix * 0.3
    m = validate_measurement(a, b)
    back = ser.decode_measurement(json.loads(ser.dumps(ser.encode_measurement(m))))
    assert np.array_equal(back.lambda_rho.matrix, m.lambda_rho.matrix)
    assert np.array_equal(back.lambda_sigma.matrix, m.lambda_sigma.matrix)


@pytest.mark.parametrize(
    "params",
    [
        EqualC1(np.diag([1.0, 0, 0]), c=0.1),
        EqualC3(np.diag([1.0, 0]), np.diag([0, 1.0]), c_r=0.25),
        Unequal3(np.diag([1.0, 0]), np.diag([0, 1.0]), 0.5, None),
    ],
)
def test_params_round_trip(params):
    data = json.loads(ser.dumps(ser.encode_params(params)))
    back = ser.decode_params(data)
    assert type(back) is type(params)
    assert ser.encode_params(back) == ser.encode_params(params)


def test_plain_numbers_accepted_as_real():
    inst = ser.decode_instance({"rho": [[0.5, 0], [0, 0.5]], "sigma": [[1, 0], [0, 0]], "p_rho": 0.5})
    assert inst.dim == 2


@pytest.mark.parametrize(
    "data, needle",
    [
        ({"rho": [[1]], "p_rho": 0.5}, "missing"),
        ({"rho": [[1]], "sigma": [[1]], "p_rho": 0.5, "extra": 1}, "unknown"),
        ({"rho": [[1, 0]], "sigma": [[1]], "p_rho": 0.5}, "square"),
        ({"rho": [[[1, 0, 0]]], "sigma": [[1]], "p_rho": 0.5}, "rho[0][0]"),
        ({"rho": [[1]], "sigma": [[1]], "p_rho": "x"}, "p_rho"),
        ({"dim": 2, "rho": [[1]], "sigma": [[1]], "p_rho": 0.5}, "dim"),
        ({"rho": [[1]], "sigma": [[1]], "p_rho": 0.5, "tolerances": {"nope": 1}}, "tolerance"),
    ],
)
def test_invalid_instances_name_location(data, needle):
    with pytest.raises(ValidationError) as info:
        ser.decode_instance(data)
    assert needle in str(info.value)


def test_unknown_param_type():
    with pytest.raises(ValidationError):
        ser.decode_params({"type": "Nope"})
    with pytest.raises(ValidationError):
        ser.decode_params({"type": "EqualC3", "psi_max": [[1]], "psi_min": [[1]]})


def test_malformed_json_location():
    with pytest.raises(ValidationError) as info:
        ser.loads('{"a": [1,\n 2', "f.json")
    assert "line 2" in str(info.value) and "f.json" in str(info.value)


def test_dumps_shortest_repr():
    assert ser.dumps({"x": 0.1, "y": 1 / 3}) == '{"x":0.1,"y":0.3333333333333333}'
    assert ser.dumps({"inf": float("inf")}) == '{"inf":"inf"}'
