"""Plain-text schedule documents.

Example::

    # geomgate schedule v1
    units = time:1/omega0 angle:rad omega0:Hz
    name = SR-NGQG X
    scheme = SR_NGQG
    gate = X
    omega0_hz = 10000000

    [segment]
    duration = 3.14159265358979
    envelope.kind = SinSquared
    envelope.params.amplitude = 1
    phase = 1.0471975511966
    path_lambda = -0.523598775598799

Blank lines and lines starting with ``#`` are ignored. Header keys precede the first
``[segment]`` block; ``gate``, ``units``, ``path_alpha`` and ``path_lambda`` are
optional.
"""

import os
import tempfile

from .errors import ParseError
from .pulses import ENVELOPE_KINDS, SCHEMES, Envelope, PulseSchedule, PulseSegment

UNITS = "time:1/omega0 angle:rad omega0:Hz"
_HEADER_REQUIRED = ("name", "scheme", "omega0_hz")
_HEADER_KEYS = _HEADER_REQUIRED + ("gate", "units")
_SEGMENT_REQUIRED = ("duration", "envelope.kind", "phase")


def _fmt(x):
    # repr is the shortest string that round-trips a float64 exactly
    return repr(float(x))


def serialize(schedule):
    lines = [
        "# geomgate schedule v1",
        f"units = {UNITS}",
        f"name = {schedule.name}",
        f"scheme = {schedule.scheme}",
    ]
    if schedule.gate is not None:
        lines.append(f"gate = {schedule.gate}")
    lines.append(f"omega0_hz = {_fmt(schedule.omega0_hz)}")
    for seg in schedule.segments:
        lines += ["", "[segment]", f"duration = {_fmt(seg.duration)}"]
        lines.append(f"envelope.kind = {seg.envelope.kind}")
        for key in sorted(seg.envelope.params):
            lines.append(f"envelope.params.{key} = {_fmt(seg.envelope.params[key])}")
        lines.append(f"phase = {_fmt(seg.phase)}")
        if seg.path_alpha is not None:
            lines.append(f"path_alpha = {seg.path_alpha}")
        if seg.path_lambda is not None:
            lines.append(f"path_lambda = {_fmt(seg.path_lambda)}")
    return "\n".join(lines) + "\n"


def _float(value, lineno, key):
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"expected a number, got {value!r}", lineno, key) from None


def _build_segment(fields, start_line):
    for key in _SEGMENT_REQUIRED:
        if key not in fields:
            raise ParseError("segment is missing a required field", start_line, key)
    kind, kline = fields["envelope.kind"]
    if kind not in ENVELOPE_KINDS:
        raise ParseError(f"unknown envelope kind {kind!r}", kline, "envelope.kind")
    params = {
        key[len("envelope.params."):]: _float(v, ln, key)
        for key, (v, ln) in fields.items()
        if key.startswith("envelope.params.")
    }
    dur = _float(*fields["duration"], "duration")
    if not dur > 0:
        raise ParseError("duration must be positive", fields["duration"][1], "duration")
    phase = _float(*fields["phase"], "phase")
    lam = fields.get("path_lambda")
    lam = None if lam is None else _float(*lam, "path_lambda")
    try:
        return PulseSegment(
            duration=dur,
            envelope=Envelope(kind, params),
            phase=phase,
            path_alpha=fields["path_alpha"][0] if "path_alpha" in fields else None,
            path_lambda=lam,
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(str(exc), start_line) from None


def parse(text):
    header = {}
    segments = []
    current = None
    current_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[segment]":
            if current is not None:
                segments.append(_build_segment(current, current_line))
            current, current_line = {}, lineno
            continue
        if line.startswith("["):
            raise ParseError(f"unknown section {line!r}", lineno)
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        target = header if current is None else current
        if current is None and key not in _HEADER_KEYS:
            raise ParseError("unknown header key", lineno, key)
        if key in target:
            raise ParseError("duplicate key", lineno, key)
        target[key] = (value, lineno)
    if current is not None:
        segments.append(_build_segment(current, current_line))
    for key in _HEADER_REQUIRED:
        if key not in header:
            raise ParseError("header is missing a required field", None, key)
    if "units" in header and header["units"][0] != UNITS:
        raise ParseError(f"unsupported units, expected {UNITS!r}", header["units"][1], "units")
    if not segments:
        raise ParseError("document has no [segment] blocks")
    scheme, sline = header["scheme"]
    if scheme not in SCHEMES:
        raise ParseError(f"unknown scheme {scheme!r}", sline, "scheme")
    omega0 = _float(*header["omega0_hz"], "omega0_hz")
    if not omega0 > 0:
        raise ParseError("omega0_hz must be positive", header["omega0_hz"][1], "omega0_hz")
    gate = header["gate"][0] if "gate" in header else None
    return PulseSchedule(header["name"][0], tuple(segments), scheme, gate, omega0)


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(schedule, path):
    atomic_write(path, serialize(schedule))


def load(path):
    with open(path) as fh:
        return parse(fh.read())
