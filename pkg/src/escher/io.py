"""File emission: legacy VTK snapshots and CSV tables.

VTK files are legacy 2.0 ASCII POLYDATA with triangle polygons and named
scalar point-data arrays written at 17 significant digits.  CSV files use
full double precision with '.' as the decimal separator; diagnostics
columns are ``step,time,energy,mass,area,h,newton_iters`` and EOC tables
are ``h,error,eoc`` with an empty order on the first row.
"""

import numpy as np

from .errors import IoError


def _fmt(x):
    return format(float(x), ".17g")


def write_vtk(mesh, arrays, path):
    """Write a mesh with named nodal scalar arrays as legacy ASCII VTK."""
    arrays = dict(arrays or {})
    n = mesh.node_count
    for name, values in arrays.items():
        values = np.asarray(values)
        if values.shape != (n,):
            raise IoError(f"array {name!r} has shape {values.shape}, "
                          f"expected ({n},)")
        arrays[name] = values
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("# vtk DataFile Version 2.0\n")
            fh.write(f"escher surface snapshot t={mesh.current_time!r}\n")
            fh.write("ASCII\n")
            fh.write("DATASET POLYDATA\n")
            fh.write(f"POINTS {n} double\n")
            for p in mesh.nodes:
                fh.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
            nt = mesh.triangle_count
            fh.write(f"POLYGONS {nt} {4 * nt}\n")
            for t in mesh.triangles:
                fh.write(f"3 {t[0]} {t[1]} {t[2]}\n")
            if arrays:
                fh.write(f"POINT_DATA {n}\n")
                for name, values in arrays.items():
                    fh.write(f"SCALARS {name} double 1\n")
                    fh.write("LOOKUP_TABLE default\n")
                    for v in values:
                        fh.write(f"{_fmt(v)}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_vtk(path):
    """Minimal legacy-VTK POLYDATA reader used to round-trip snapshots.

    Returns ``(points, triangles, arrays)`` with arrays keyed by name.
    """
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split("\n")
    i = 0

    def next_line():
        nonlocal i
        while i < len(tokens) and not tokens[i].strip():
            i += 1
        line = tokens[i].strip()
        i += 1
        return line

    header = next_line()
    if not header.startswith("# vtk DataFile"):
        raise IoError(f"{path} is not a legacy VTK file")
    next_line()  # title
    if next_line() != "ASCII":
        raise IoError("only ASCII VTK is supported")
    if next_line() != "DATASET POLYDATA":
        raise IoError("only POLYDATA is supported")

    kind, count, _ = next_line().split()
    assert kind == "POINTS"
    n = int(count)
    points = np.array([next_line().split() for _ in range(n)], dtype=float)

    kind, nt, _total = next_line().split()
    assert kind == "POLYGONS"
    tris = np.array([next_line().split()[1:] for _ in range(int(nt))], dtype=int)

    arrays = {}
    while i < len(tokens):
        line = tokens[i].strip()
        i += 1
        if not line:
            continue
        if line.startswith("POINT_DATA"):
            continue
        if line.startswith("SCALARS"):
            name = line.split()[1]
            next_line()  # LOOKUP_TABLE
            arrays[name] = np.array([next_line() for _ in range(n)], dtype=float)
    return points, tris, arrays


def write_diagnostics_csv(records, path):
    """Diagnostic trajectory as CSV, one row per recorded step."""
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("step,time,energy,mass,area,h,newton_iters\n")
            for r in records:
                fh.write(
                    f"{r.step},{_fmt(r.time)},{_fmt(r.energy)},{_fmt(r.mass)},"
                    f"{_fmt(r.area)},{_fmt(r.h)},{r.newton_iters}\n"
                )
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_eoc_csv(table, path):
    """EOC table as CSV with columns h,error,eoc."""
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("h,error,eoc\n")
            for h, e, order in table.rows():
                order_s = "" if order is None else _fmt(order)
                fh.write(f"{_fmt(h)},{_fmt(e)},{order_s}\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
