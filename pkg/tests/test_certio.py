"""Tests for certificate serialization: float encoding round-trips,
canonical JSON determinism, document validation, and atomic save/load."""

import json
import os

import pytest
from hypothesis import given, strategies as st
from mpmath import mp

from lcpforge.certio import (
    LcpCertificate,
    SCHEMA_VERSION,
    canonical_json,
    certificate_from_json,
    collect_verdicts,
    dec_float,
    enc_float,
    enc_float_matrix,
    enc_float_vector,
    load_certificate,
)
from lcpforge.errors import InputError


def _minimal_doc(**overrides):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "pipeline": "ranklcp",
        "parameters": {"n": 1},
        "precision_bits": 128,
        "seed": 0,
        "checks": {"rank": {"verdict": True}},
        "verdict": "PASS",
        "failed_check": None,
    }
    doc.update(overrides)
    return doc


# --------------------------------------------------------------------------
# float encoding


@pytest.mark.parametrize("bits", [64, 128, 256, 1024])
def test_enc_float_roundtrip_exact(bits):
    with mp.workprec(bits):
        x = mp.log(mp.mpf(7)) / 3
    pair = enc_float(x, bits)
    assert isinstance(pair[0], str) and pair[1] == bits
    with mp.workprec(bits):
        assert dec_float(pair) == x


@given(st.integers(min_value=-(2**60), max_value=2**60),
       st.integers(min_value=-40, max_value=40))
def test_enc_float_roundtrip_dyadic(mantissa, exponent):
    bits = 128
    with mp.workprec(bits):
        x = mp.mpf(mantissa) * mp.mpf(2) ** exponent
    pair = enc_float(x, bits)
    with mp.workprec(bits):
        assert dec_float(pair) == x


def test_enc_float_vector_and_matrix():
    with mp.workprec(96):
        vec = [mp.mpf(1) / 3, mp.sqrt(2)]
    enc = enc_float_vector(vec, 96)
    assert len(enc) == 2 and all(pair[1] == 96 for pair in enc)
    mat = enc_float_matrix([vec, vec], 96)
    assert mat[0] == mat[1] == enc


def test_dec_float_rejects_garbage():
    with pytest.raises(InputError):
        dec_float(["not a number", 128])
    with pytest.raises(InputError):
        dec_float(["1.0"])


# --------------------------------------------------------------------------
# canonical JSON


def test_canonical_json_is_sorted_and_newline_terminated():
    text = canonical_json({"b": 1, "a": [True, None, "x"]})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"b": 1, "a": [True, None, "x"]}


def test_canonical_json_deterministic():
    doc = _minimal_doc()
    assert canonical_json(doc) == canonical_json(json.loads(canonical_json(doc)))


def test_canonical_json_rejects_floats_and_objects():
    with pytest.raises(InputError):
        canonical_json({"x": 1.5})
    with pytest.raises(InputError):
        canonical_json({"x": mp.mpf(1)})
    with pytest.raises(InputError):
        canonical_json({1: "non-string key"})


# --------------------------------------------------------------------------
# certificate container


def test_certificate_requires_core_keys():
    for key in ("schema_version", "pipeline", "precision_bits", "seed",
                "checks", "verdict"):
        doc = _minimal_doc()
        del doc[key]
        with pytest.raises(InputError):
            LcpCertificate(doc)


def test_certificate_properties():
    cert = LcpCertificate(_minimal_doc())
    assert cert.pipeline == "ranklcp"
    assert cert.parameters == {"n": 1}
    assert cert.precision_bits == 128
    assert cert.seed == 0
    assert cert.passed and cert.failed_check is None
    failed = LcpCertificate(
        _minimal_doc(verdict="FAILED", failed_check="rank",
                     checks={"rank": {"verdict": False}})
    )
    assert not failed.passed and failed.failed_check == "rank"


def test_certificate_json_roundtrip_byte_identical():
    cert = LcpCertificate(_minimal_doc())
    text = cert.to_json()
    again = certificate_from_json(text)
    assert again.to_json() == text


def test_certificate_from_json_rejects_malformed():
    with pytest.raises(InputError):
        certificate_from_json("{broken")
    with pytest.raises(InputError):
        certificate_from_json(json.dumps(_minimal_doc(schema_version=99)))
    with pytest.raises(InputError):
        certificate_from_json(json.dumps([1, 2, 3]))


def test_save_and_load_roundtrip(tmp_path):
    cert = LcpCertificate(_minimal_doc())
    path = tmp_path / "cert.json"
    cert.save(str(path))
    loaded = load_certificate(str(path))
    assert loaded.to_json() == cert.to_json()
    # the write is atomic: no stray temp files remain
    assert os.listdir(str(tmp_path)) == ["cert.json"]


def test_load_certificate_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_certificate(str(tmp_path / "nope.json"))


# --------------------------------------------------------------------------
# verdict collection


def test_collect_verdicts_nested():
    tree = {
        "a": {"verdict": True, "inner": [{"verdict": False}]},
        "b": {"deep": {"verdict": True}},
    }
    got = collect_verdicts(tree)
    assert got == {
        "checks.a": True,
        "checks.a.inner[0]": False,
        "checks.b.deep": True,
    }


def test_collect_verdicts_empty():
    assert collect_verdicts({}) == {}
    assert collect_verdicts({"x": {"value": 3}}) == {}
