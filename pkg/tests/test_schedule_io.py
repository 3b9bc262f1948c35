import os

import pytest
from hypothesis import given, strategies as st

from geomgate.errors import ParseError
from geomgate.pulses import GATES, Envelope, PulseSchedule, PulseSegment, build_schedule
from geomgate.schedule_io import atomic_write, load, parse, save, serialize

MINIMAL = """\
name = one
scheme = DYNAMICAL
omega0_hz = 1e7

[segment]
duration = 3.0
envelope.kind = Constant
envelope.params.amplitude = 0.5
phase = 0.25
"""

ALL = [(s, g) for s in ("SR_NGQG", "NGQG_P1", "NGQG_P2", "DYNAMICAL") for g in GATES]
ALL += [("SSSP", "X"), ("SSSP", "Y")]


@pytest.mark.parametrize("scheme, gate", ALL)
def test_round_trip_builders(scheme, gate):
    s = build_schedule(scheme, gate)
    assert parse(serialize(s)) == s


def test_minimal_document():
    s = parse(MINIMAL)
    assert len(s.segments) == 1
    assert s.segments[0].envelope == Envelope("Constant", {"amplitude": 0.5})
    assert s.gate is None


def test_missing_duration_names_field():
    text = MINIMAL.replace("duration = 3.0\n", "")
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.field == "duration"
    assert "duration" in str(info.value)


@pytest.mark.parametrize(
    "old, new, field",
    [
        ("phase = 0.25", "phase = abc", "phase"),
        ("scheme = DYNAMICAL", "scheme = FOO", "scheme"),
        ("envelope.kind = Constant", "envelope.kind = Square", "envelope.kind"),
        ("duration = 3.0", "duration = -1", "duration"),
    ],
)
def test_bad_values_report_line_and_field(old, new, field):
    text = MINIMAL.replace(old, new)
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.field == field
    assert info.value.line == text.splitlines().index(new) + 1


def test_duplicate_and_unknown_keys():
    with pytest.raises(ParseError):
        parse(MINIMAL.replace("name = one", "name = one\nname = two"))
    with pytest.raises(ParseError):
        parse(MINIMAL.replace("name = one", "colour = red"))
    with pytest.raises(ParseError):
        parse(MINIMAL.split("[segment]")[0])


def test_angles_written_with_full_precision():
    text = serialize(build_schedule("SR_NGQG", "X"))
    phases = [line.split("=")[1].strip() for line in text.splitlines() if line.startswith("phase")]
    assert all(len(p.replace("-", "").replace(".", "")) >= 12 for p in phases)


@given(
    durations=st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=5),
    phase=st.floats(-10, 10),
    amp=st.floats(0, 5),
)
def test_round_trip_random(durations, phase, amp):
    segs = tuple(PulseSegment(d, Envelope("SinSquared", {"amplitude": amp}), phase + i)
                 for i, d in enumerate(durations))
    s = PulseSchedule("random", segs, "NGQG_P1", "X", 12345.678)
    assert parse(serialize(s)) == s


def test_save_load_atomic(tmp_path):
    path = tmp_path / "s.txt"
    s = build_schedule("SSSP", "X")
    save(s, str(path))
    assert load(str(path)) == s
    assert [p.name for p in tmp_path.iterdir()] == ["s.txt"]


def test_atomic_write_keeps_old_file_on_failure(tmp_path, monkeypatch):
    path = tmp_path / "keep.txt"
    path.write_text("old")

    def boom(*args):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(str(path), "new")
    assert path.read_text() == "old"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["keep.txt"]
