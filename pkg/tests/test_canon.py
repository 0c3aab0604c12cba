import random
import string

import pytest

from codeuq.canon import OutputDecodeError, canonical_json, format_float, normalize


def test_trailing_whitespace_stripped():
    assert normalize(b"42\n") == "42"
    assert normalize(b"a  \nb\t\t\n\n") == "a\nb"


def test_float_token_reformatted_to_nine_significant_digits():
    # oracle: decimal module, 9 significant digits of the parsed value
    from decimal import Decimal

    raw = b"0.30000000000000004"
    expected_digits = Decimal("0.30000000000000004").normalize()
    got = normalize(raw)
    assert got == "0.300000000"
    assert Decimal(got) == Decimal(f"{float(expected_digits):.9g}")


def test_json_keys_sorted_and_whitespace_dropped():
    assert normalize(b'{"b":1, "a":2}') == '{"a":2,"b":1}'


def test_integers_left_untouched():
    assert normalize(b"42") == "42"
    assert normalize(b"x = 042 end") == "x = 042 end"


def test_close_floats_collide_after_normalization():
    assert normalize(b"0.1") == normalize(b"0.10000000000000001")
    assert normalize(b"2.0") == normalize(b"1.9999999999999999999")


def test_canonical_json_nested():
    value = {"b": [1, 2.5, {"z": None, "a": True}], "a": "x"}
    assert canonical_json(value) == '{"a":"x","b":[1,2.50000000,{"a":true,"z":null}]}'


def test_canonical_json_rejects_non_json():
    with pytest.raises(TypeError):
        canonical_json({1: "int key"})
    with pytest.raises(TypeError):
        canonical_json(object())


def test_fully_undecodable_bytes_raise():
    with pytest.raises(OutputDecodeError):
        normalize(b"\xff\xfe\xff")


def test_partially_decodable_bytes_survive():
    out = normalize(b"ok \xff\xfe done")
    assert "ok" in out and "done" in out


def test_format_float_special_values():
    assert format_float(float("nan")) == "NaN"
    assert format_float(float("inf")) == "Infinity"
    assert format_float(float("-inf")) == "-Infinity"


def test_normalize_idempotent_on_random_text():
    rng = random.Random(7)
    alphabet = string.ascii_letters + string.digits + " .\n-+eE{}[]\":,"
    for _ in range(500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        once = normalize(text)
        assert normalize(once) == once


def test_normalize_idempotent_on_random_json():
    rng = random.Random(11)

    def gen(depth=0):
        kind = rng.randrange(6 if depth < 3 else 4)
        if kind == 0:
            return rng.randint(-10**9, 10**9)
        if kind == 1:
            return rng.uniform(-1e6, 1e6)
        if kind == 2:
            return rng.choice([True, False, None])
        if kind == 3:
            return "".join(rng.choice(string.ascii_letters) for _ in range(rng.randint(0, 8)))
        if kind == 4:
            return [gen(depth + 1) for _ in range(rng.randint(0, 4))]
        return {f"k{i}": gen(depth + 1) for i in range(rng.randint(0, 4))}

    import json

    for _ in range(300):
        text = json.dumps(gen())
        once = normalize(text)
        assert normalize(once) == once
