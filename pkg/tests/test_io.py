import struct

import numpy as np
import pytest

from scanthz import io as cimio
from scanthz.acquisition import SensingMatrix, gen_bernoulli_k, gen_gaussian_complex
from scanthz.errors import FormatError

from conftest import crandn


def test_cim_layout(rng):
    x = crandn(rng, 2, 3)
    buf = cimio.encode_cim(x)
    assert buf[:4] == b"CIM1"
    assert struct.unpack_from("<II", buf, 4) == (2, 3)
    assert len(buf) == 12 + 2 * 3 * 16
    re, im = struct.unpack_from("<dd", buf, 12 + 16)
    assert complex(re, im) == x[0, 1]


@pytest.mark.parametrize("fmt", cimio.FORMATS)
def test_image_round_trip(tmp_path, rng, fmt):
    x = crandn(rng, 5, 4)
    path = tmp_path / f"x.{fmt}"
    cimio.write_image(path, x, fmt)
    np.testing.assert_array_equal(cimio.read_image(path), x)


def test_csv_layout():
    text = cimio.encode_csv(np.array([[1 + 2j, 3.5]]))
    assert text.splitlines() == ["1,2", "0,0,1.0,2.0", "0,1,3.5,0.0"]


def test_sensing_tags(tmp_path):
    g = gen_gaussian_complex(3, 6, 1)
    b = gen_bernoulli_k(4, 6, 2, 1)
    cimio.write_sensing(tmp_path / "g.cim", g)
    cimio.write_sensing(tmp_path / "b.cim", b)
    raw = (tmp_path / "b.cim").read_bytes()
    assert raw[12] == 1 and struct.unpack_from("<I", raw, 13) == (2,)
    assert (tmp_path / "g.cim").read_bytes()[12] == 0
    g2 = cimio.read_sensing(tmp_path / "g.cim")
    b2 = cimio.read_sensing(tmp_path / "b.cim")
    assert g2.kind == "gaussian" and b2.kind == "bernoulli" and b2.k == 2
    np.testing.assert_array_equal(b2.data, b.data)
    # a plain image reader skips the tag
    np.testing.assert_array_equal(cimio.read_image(tmp_path / "b.cim"), b.data)


def test_custom_matrix_round_trip(tmp_path):
    phi = SensingMatrix(np.eye(3))
    cimio.write_sensing(tmp_path / "i.cim", phi)
    assert cimio.read_sensing(tmp_path / "i.cim").kind == "custom"


@pytest.mark.parametrize(
    "payload",
    [b"XXXX" + bytes(8), b"CIM1" + struct.pack("<II", 2, 2) + bytes(10), b"CIM"],
)
def test_bad_cim(payload):
    with pytest.raises(FormatError):
        cimio.decode_cim(payload)


@pytest.mark.parametrize("text", ["", "2,2\n0,0,1,0\n", "a,b\n", "1,1\n0,5,1,1\n", "1,1\n0,0,x,1\n"])
def test_bad_csv(text):
    with pytest.raises(FormatError):
        cimio.decode_csv(text)
