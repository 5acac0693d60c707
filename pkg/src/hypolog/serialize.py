"""JSON/CSV schemas for the data objects that cross the library boundary.

Complex matrices are stored row-major as [re, im] pairs; superoperators
and densities carry their dimension and the basis tag "column-stacking"
(matrix unit e_{jk} -> index (k-1)·d + j).  Band-limited functions store
one complex block per band.  Sampled fields use CSV with quaternion
columns c,x,y,z followed by one re/im column pair per value entry.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import InvalidInput
from .pwfun import BandLimitedFunction, SampledField
from .qms import DensityMatrix, Superoperator
from .su2repr import GroupElement

SCHEMA_VERSION = 1
BASIS_TAG = "column-stacking"


def matrix_to_pairs(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    return [[float(z.real), float(z.imag)] for z in a.reshape(-1)]


def pairs_to_matrix(pairs: list, shape: tuple[int, int]) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    if flat.size != shape[0] * shape[1]:
        raise InvalidInput(f"expected {shape[0]*shape[1]} entries, got {flat.size}")
    return flat.reshape(shape)


def density_to_json(rho: DensityMatrix) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "density", "dim": rho.dim,
            "basis": BASIS_TAG, "data": matrix_to_pairs(rho.matrix)}


def density_from_json(doc: dict) -> DensityMatrix:
    _expect(doc, "density")
    d = int(doc["dim"])
    return DensityMatrix(pairs_to_matrix(doc["data"], (d, d)))


def superop_to_json(L: Superoperator) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "superoperator", "dim": L.dim,
            "basis": BASIS_TAG, "data": matrix_to_pairs(L.matrix)}


def superop_from_json(doc: dict) -> Superoperator:
    _expect(doc, "superoperator")
    d = int(doc["dim"])
    return Superoperator(dim=d, matrix=pairs_to_matrix(doc["data"], (d * d, d * d)))


def blf_to_json(f: BandLimitedFunction) -> dict:
    return {"schema": SCHEMA_VERSION, "kind": "band-limited-function",
            "m_max": f.m_max, "value_dim": f.value_dim,
            "coeffs": [{"m": m, "data": matrix_to_pairs(a)}
                       for m, a in enumerate(f.coeffs, start=1)]}


def blf_from_json(doc: dict) -> BandLimitedFunction:
    _expect(doc, "band-limited-function")
    n = int(doc["value_dim"])
    blocks = []
    for entry in doc["coeffs"]:
        m = int(entry["m"])
        blocks.append(pairs_to_matrix(entry["data"], (m * n, m * n)))
    return BandLimitedFunction(int(doc["m_max"]), n, tuple(blocks))


def _expect(doc: dict, kind: str) -> None:
    if doc.get("kind") != kind:
        raise InvalidInput(f"expected kind={kind!r}, got {doc.get('kind')!r}")


def sampled_field_to_csv(field: SampledField) -> str:
    """Quaternion columns c,x,y,z then v{r}{s}_re / v{r}{s}_im pairs."""
    n = field.value_dim
    header = ["c", "x", "y", "z"]
    for r in range(n):
        for s in range(n):
            header += [f"v{r}{s}_re", f"v{r}{s}_im"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for g, val in zip(field.points, field.values):
        row = [repr(g.c), repr(g.x), repr(g.y), repr(g.z)]
        for r in range(n):
            for s in range(n):
                row += [repr(float(val[r, s].real)), repr(float(val[r, s].imag))]
        w.writerow(row)
    return buf.getvalue()


def sampled_field_from_csv(text: str) -> SampledField:
    rows = [r for r in csv.reader(io.StringIO(text))
            if r and not r[0].startswith("#")]
    header, data = rows[0], rows[1:]
    if header[:4] != ["c", "x", "y", "z"]:
        raise InvalidInput("sampled-field CSV must start with c,x,y,z columns")
    n = int(round(np.sqrt((len(header) - 4) / 2)))
    points = []
    values = np.zeros((len(data), n, n), dtype=complex)
    for p, row in enumerate(data):
        points.append(GroupElement(*(float(v) for v in row[:4])))
        k = 4
        for r in range(n):
            for s in range(n):
                values[p, r, s] = complex(float(row[k]), float(row[k + 1]))
                k += 2
    return SampledField(points=tuple(points), values=values)
