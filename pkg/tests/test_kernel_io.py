import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from detent import dilate, read_kernel, transfer_current, write_kernel
from detent.errors import FormatError
from detent.graph import generate_family


@pytest.mark.parametrize("encoding", ["csv", "binary"])
def test_round_trip_bit_exact(tmp_path, encoding):
    k = transfer_current(generate_family("complete", 5))
    write_kernel(tmp_path / "k.dk", k, encoding)
    back = read_kernel(tmp_path / "k.dk")
    assert np.array_equal(back.matrix, k.matrix)
    assert back.kind == k.kind
    assert back.ground.base_graph == k.ground.base_graph
    assert back.ground.source_graph == k.ground.source_graph


def test_default_encoding_switches_on_size(tmp_path):
    small = transfer_current(generate_family("complete", 4))
    big = transfer_current(generate_family("torus2d", 3))
    write_kernel(tmp_path / "s.dk", small)
    write_kernel(tmp_path / "b.dk", big)
    assert not (tmp_path / "s.dk.bin").exists()
    assert (tmp_path / "b.dk.bin").exists()


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.sampled_from(["csv", "binary"]))
def test_round_trip_property(tmp_path_factory, size, seed, encoding):
    from detent import GroundSet, validate_kernel
    from detent.graph import empty_graph

    t = validate_kernel(oracles.random_contraction(size, np.random.default_rng(seed)), GroundSet(empty_graph(size)))
    p = dilate(t)
    path = tmp_path_factory.mktemp("k") / "p.dk"
    write_kernel(path, p, encoding)
    back = read_kernel(path)
    assert np.array_equal(back.matrix, p.matrix)
    assert back.ground.n_labels == 2


def _write_csv(tmp_path):
    path = tmp_path / "k.dk"
    write_kernel(path, transfer_current(generate_family("cycle", 3)), "csv")
    return path


def test_malformed_header(tmp_path):
    path = tmp_path / "k.dk"
    path.write_text('{"format": "detent-kernel", \n')
    with pytest.raises(FormatError) as exc:
        read_kernel(path)
    assert "offset" in str(exc.value)


def test_bad_number_reports_offset(tmp_path):
    path = _write_csv(tmp_path)
    text = path.read_bytes()
    head_end = text.index(b"\n") + 1
    broken = text[:head_end] + b"abc" + text[head_end + 3:]
    path.write_bytes(broken)
    with pytest.raises(FormatError) as exc:
        read_kernel(path)
    assert exc.value.offset == head_end


def test_truncated_rows(tmp_path):
    path = _write_csv(tmp_path)
    lines = path.read_text().splitlines(keepends=True)
    path.write_text("".join(lines[:-1]))
    with pytest.raises(FormatError):
        read_kernel(path)


def test_sidecar_size_mismatch(tmp_path):
    path = tmp_path / "k.dk"
    write_kernel(path, transfer_current(generate_family("cycle", 3)), "binary")
    (tmp_path / "k.dk.bin").write_bytes(b"\0" * 7)
    with pytest.raises(FormatError):
        read_kernel(path)


def test_non_contraction_content_rejected(tmp_path):
    path = _write_csv(tmp_path)
    lines = path.read_text().splitlines(keepends=True)
    header = json.loads(lines[0])
    rows = ["2.0,0.0,0.0\n", "0.0,0.0,0.0\n", "0.0,0.0,0.0\n"]
    path.write_text(json.dumps(header) + "\n" + "".join(rows))
    with pytest.raises(FormatError) as exc:
        read_kernel(path)
    assert exc.value.offset == len(lines[0].encode())


def test_missing_file(tmp_path):
    with pytest.raises(FormatError):
        read_kernel(tmp_path / "absent.dk")
