"""Spectrogram images on the lattice grid."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class RenderSpec:
    """Grayscale rendering of ``|c|^2`` in dB over ``dynamic_range`` dB."""

    dynamic_range: float = 60.0

    def __post_init__(self):
        if not np.isfinite(self.dynamic_range) or self.dynamic_range <= 0:
            raise InvalidParameterError(f"dynamic range must be positive, got {self.dynamic_range}")


def spectrogram_pixels(c, spec=RenderSpec()):
    """8-bit image of the coefficients, one pixel per lattice point.

    Row 0 of the returned array is the top of the image, so frequency 0 sits
    on the bottom row. Column ``n`` is rotated by ``round(n s / b)`` rows so
    that sheared lattices are drawn at their true frequencies.
    """
    values = np.asarray(c.values)
    if values.size == 0:
        raise InvalidParameterError("cannot render an empty coefficient array")
    power = np.abs(values) ** 2
    top = power.max()
    if top == 0:
        raise InvalidParameterError("all coefficients are zero; dB scale is undefined")
    with np.errstate(divide="ignore"):
        db = 10 * np.log10(power / top)
    floor = -spec.dynamic_range
    level = (np.clip(db, floor, 0.0) - floor) / spec.dynamic_range
    img = np.rint(255 * level).astype(np.uint8)

    lat = c.lattice
    for n in range(lat.n_time):
        shift = int(np.rint(n * lat.s / lat.b))
        if shift:
            img[:, n] = np.roll(img[:, n], shift)
    return img[::-1]


def write_pgm(img, path):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_pgm(path):
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5" or int(parts[3]) != 255:
        raise InvalidParameterError(f"{path}: not an 8-bit binary PGM")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4], dtype=np.uint8, count=w * h).reshape(h, w)


def render_spectrogram(c, spec, path):
    """Write the spectrogram of ``c`` to ``path`` as PGM, or PNG for ``.png`` paths."""
    img = spectrogram_pixels(c, spec)
    if str(path).lower().endswith(".png"):
        try:
            from PIL import Image
        except ImportError as exc:
            raise InvalidParameterError("PNG output needs Pillow; use a .pgm path instead") from exc
        Image.fromarray(img, mode="L").save(path)
    else:
        write_pgm(img, path)
    return img
