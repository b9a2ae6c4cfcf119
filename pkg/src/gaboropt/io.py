"""Reading and writing signals, coefficients, lattices and generator matrices.

Floats are written with ``repr`` so that CSV round trips are bitwise exact.
"""

import csv
import json
import wave
from pathlib import Path

import numpy as np

from .errors import DimensionError, InvalidParameterError
from .gabor import GaborCoefficients, Lattice, lattice_points
from .lattice_adapt import GeneratorMatrix


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_signal_csv(f, path):
    f = np.asarray(f, dtype=np.complex128)
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["index", "re", "im"])
        for k, v in enumerate(f):
            w.writerow([k, repr(float(v.real)), repr(float(v.imag))])


def read_signal_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise DimensionError(f"{path}: no samples")
    try:
        idx = [int(r["index"]) for r in rows]
        vals = [complex(float(r["re"]), float(r["im"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"{path}: malformed signal CSV ({exc})") from exc
    if idx != list(range(len(rows))):
        raise InvalidParameterError(f"{path}: indices must run 0..N-1 in order")
    return np.array(vals, dtype=np.complex128)


def read_wav(path):
    """Read a 16-bit PCM mono WAV file.

    Returns the samples scaled to ``[-1, 1)`` as a complex vector and the
    sample rate. The rate is metadata only; all processing is in samples.
    """
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1:
                raise InvalidParameterError(f"{path}: expected mono, got {wf.getnchannels()} channels")
            if wf.getsampwidth() != 2:
                raise InvalidParameterError(f"{path}: expected 16-bit PCM samples")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise InvalidParameterError(f"{path}: {exc}") from exc
    x = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    return x.astype(np.complex128), rate


def write_sidecar(path, **meta):
    """Write ``meta`` as JSON next to ``path`` (``<path>.meta.json``)."""
    side = Path(str(path) + ".meta.json")
    side.write_text(json.dumps(meta, sort_keys=True) + "\n")
    return side


def read_signal(path):
    """Load a signal from CSV or WAV, chosen by file extension."""
    if str(path).lower().endswith(".wav"):
        f, _ = read_wav(path)
        return f
    return read_signal_csv(path)


def write_lattice_json(lattice, path):
    Path(path).write_text(json.dumps(lattice.to_dict(), sort_keys=True) + "\n")


def read_lattice_json(path):
    d = json.loads(Path(path).read_text())
    try:
        return Lattice(int(d["a"]), int(d["b"]), int(d["s"]), int(d["N"]))
    except KeyError as exc:
        raise InvalidParameterError(f"{path}: missing lattice field {exc}") from exc


def write_generator_json(M, path):
    Path(path).write_text(json.dumps(M.to_dict(), sort_keys=True) + "\n")


def read_generator_json(path):
    d = json.loads(Path(path).read_text())
    if d.get("m12", 0.0) != 0.0:
        raise InvalidParameterError("generator matrix must be lower triangular")
    return GeneratorMatrix(float(d["m11"]), float(d["m21"]), float(d["m22"]), int(d["N"]), float(d["R"]))


def _header_path(path):
    return Path(str(path) + ".json")


def write_coefficients(c, path):
    """Write coefficients as CSV ``x, xi, re, im`` plus a ``<path>.json`` lattice header."""
    pts = lattice_points(c.lattice)
    flat = c.flat()
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(["x", "xi", "re", "im"])
        for (x, xi), v in zip(pts, flat):
            w.writerow([int(x), int(xi), repr(float(v.real)), repr(float(v.imag))])
    lat = c.lattice
    _header_path(path).write_text(
        json.dumps({"a": lat.a, "b": lat.b, "s": lat.s, "N": lat.N}, sort_keys=True) + "\n"
    )


def read_coefficients(path):
    head = json.loads(_header_path(path).read_text())
    lattice = Lattice(int(head["a"]), int(head["b"]), int(head["s"]), int(head["N"]))
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if len(rows) != lattice.n_time * lattice.n_freq:
        raise DimensionError(f"{path}: {len(rows)} rows for a lattice with {lattice.n_time * lattice.n_freq} points")
    pts = lattice_points(lattice)
    got = np.array([[int(r["x"]), int(r["xi"])] for r in rows])
    if not np.array_equal(got, pts):
        raise InvalidParameterError(f"{path}: point order does not match the lattice header")
    flat = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    return GaborCoefficients(flat.reshape(lattice.shape, order="F"), lattice)
