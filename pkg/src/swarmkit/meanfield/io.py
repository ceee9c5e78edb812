"""Density snapshot serialization: text CSV and a compact binary dump.

Both formats store the axis descriptors (name, interval, cell count),
the snapshot time, and the cell values in C (row-major) order, and both
round-trip exactly: the CSV writes floats with ``repr``, the binary dump
stores raw 64-bit floats.  The grid's dt and splitting are evolution
settings, not snapshot data, so readers return fields on a grid with the
default time-stepping configuration.
"""

from __future__ import annotations

import struct

import numpy as np

from .grid import Axis, DensityField, PhaseGrid

__all__ = [
    "write_density_csv",
    "read_density_csv",
    "write_density_binary",
    "read_density_binary",
]

MAGIC = b"SWMFDENS"
VERSION = 1


def write_density_csv(path, field: DensityField) -> None:
    """Axis header lines, a time line, then one line of cells per row of
    the trailing axis (a single line for 1D fields)."""
    grid = field.grid
    with open(path, "w") as fh:
        for name, axis in zip(grid.axis_names, grid.axes):
            fh.write(f"axis,{name},{axis.lower!r},{axis.upper!r},{axis.n}\n")
        fh.write(f"time,{field.time!r}\n")
        rows = field.values.reshape(-1, field.values.shape[-1])
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_density_csv(path) -> DensityField:
    axes = {}
    time = None
    values_lines = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            head = line.split(",", 1)[0]
            if head == "axis":
                _, name, lower, upper, n = line.split(",")
                axes[name] = Axis(float(lower), float(upper), int(n))
            elif head == "time":
                time = float(line.split(",")[1])
            else:
                values_lines.append(np.array([float(tok) for tok in line.split(",")]))
    if not axes or time is None:
        raise ValueError(f"{path} is not a density snapshot")
    grid = PhaseGrid(**axes)
    values = np.vstack(values_lines).reshape(grid.shape)
    return DensityField(grid, values, time)


def write_density_binary(path, field: DensityField) -> None:
    """Magic, version, axis descriptors, time, then raw float64 cells."""
    grid = field.grid
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(grid.axes)))
        for name, axis in zip(grid.axis_names, grid.axes):
            fh.write(struct.pack("<cddQ", name.encode(), axis.lower, axis.upper, axis.n))
        fh.write(struct.pack("<d", field.time))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_density_binary(path) -> DensityField:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path} is not a density dump (bad magic)")
        version, n_axes = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported density dump version {version}")
        axes = {}
        for _ in range(n_axes):
            name, lower, upper, n = struct.unpack("<cddQ", fh.read(25))
            axes[name.decode()] = Axis(lower, upper, int(n))
        (time,) = struct.unpack("<d", fh.read(8))
        grid = PhaseGrid(**axes)
        count = int(np.prod(grid.shape))
        values = np.frombuffer(fh.read(count * 8), dtype="<f8", count=count).reshape(grid.shape)
    return DensityField(grid, values.copy(), time)
