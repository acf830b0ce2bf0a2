"""Periodic uniform grids: field container, serialization, initial-data presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import SigmaParams

_HEADER_MAGIC = "fracheat-gridfield-v1"


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass
class GridField:
    """Real field sampled on [-L/2, L/2)^dim with n points per axis."""

    params: SigmaParams
    L: float
    values: np.ndarray
    time_tag: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != self.params.dim:
            raise ValueError(
                f"values have {self.values.ndim} axes, expected {self.params.dim}"
            )
        n = self.values.shape[0]
        if any(s != n for s in self.values.shape):
            raise ValueError("grid must have the same number of points per axis")
        if not _is_power_of_two(n):
            raise ValueError(f"grid points per axis must be a power of two, got {n}")
        if self.L <= 0:
            raise ValueError("period L must be positive")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return self.L / self.n

    def axis(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.h

    def meshgrid(self) -> list[np.ndarray]:
        return list(np.meshgrid(*([self.axis()] * self.params.dim), indexing="ij"))

    def radius(self) -> np.ndarray:
        g = self.meshgrid()
        return np.sqrt(sum(c**2 for c in g))

    def with_values(self, values, time_tag: float | None = None) -> "GridField":
        return GridField(self.params, self.L, values, time_tag)

    def mean(self) -> float:
        return float(self.values.mean())

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    def l1_norm(self) -> float:
        return float(np.abs(self.values).sum() * self.h**self.params.dim)

    def l2_norm(self) -> float:
        return float(np.sqrt((self.values**2).sum() * self.h**self.params.dim))


def frequency_magnitudes(field: GridField) -> np.ndarray:
    """|xi| on the DFT frequency lattice, xi = 2 pi k / L per axis."""
    k = 2.0 * np.pi * np.fft.fftfreq(field.n, d=field.h)
    grids = np.meshgrid(*([k] * field.params.dim), indexing="ij")
    return np.sqrt(sum(g**2 for g in grids))


def save_field(field: GridField, path: str | Path) -> Path:
    """Single-file format: one JSON header line, then little-endian float64."""
    path = Path(path)
    header = {
        "format": _HEADER_MAGIC,
        "dim": field.params.dim,
        "sigma": field.params.sigma,
        "L": field.L,
        "n": field.n,
        "time_tag": field.time_tag,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return path


def load_field(path: str | Path) -> GridField:
    path = Path(path)
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format") != _HEADER_MAGIC:
            raise ValueError(f"{path} is not a grid-field file")
        raw = fh.read()
    n, dim = header["n"], header["dim"]
    values = np.frombuffer(raw, dtype="<f8").reshape((n,) * dim).copy()
    return GridField(
        SigmaParams(dim, header["sigma"]), header["L"], values, header["time_tag"]
    )


def field_to_csv(field: GridField, path: str | Path) -> Path:
    if field.params.dim != 1:
        raise ValueError("CSV export is one-dimensional only")
    path = Path(path)
    np.savetxt(
        path,
        np.column_stack([field.axis(), field.values]),
        delimiter=",",
        header="x,value",
        comments="",
    )
    return path


# ---------------------------------------------------------------------------
# initial-data presets


def make_field(params: SigmaParams, L: float, n: int, fn, time_tag=None) -> GridField:
    proto = GridField(params, L, np.zeros((n,) * params.dim))
    vals = fn(*proto.meshgrid())
    return GridField(params, L, vals, time_tag)


def initial_data(
    preset: str,
    params: SigmaParams,
    L: float,
    n: int,
    amplitude: float = 1.0,
    width: float = 1.0,
    separation: float | None = None,
) -> GridField:
    """Named initial-data presets: gaussian, box, two-bump, signed-two-bump."""
    if separation is None:
        separation = L / 4.0
    half = separation / 2.0

    def gaussian(*xs, shift=0.0, sign=1.0):
        r2 = sum((x - shift) ** 2 for x in xs)
        return sign * amplitude * np.exp(-r2 / width**2)

    if preset == "gaussian":
        fn = gaussian
    elif preset == "box":
        def fn(*xs):
            r = np.sqrt(sum(x**2 for x in xs))
            return amplitude * (r < width).astype(float)
    elif preset == "two-bump":
        def fn(*xs):
            return gaussian(*xs, shift=-half) + gaussian(*xs, shift=half)
    elif preset == "signed-two-bump":
        def fn(*xs):
            return gaussian(*xs, shift=-half) + gaussian(*xs, shift=half, sign=-1.0)
    else:
        raise ValueError(f"unknown initial-data preset {preset!r}")
    return make_field(params, L, n, fn, time_tag=0.0)
