"""Dense operator matrices and their text dump format."""

from dataclasses import dataclass

import numpy as np

MAT_MAGIC = "BIE-MAT"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense Galerkin matrix of one operator on a given space."""

    data: np.ndarray
    tag: str = ""

    @property
    def shape(self):
        return self.data.shape

    @property
    def is_complex(self):
        return np.iscomplexobj(self.data)


def write_matrix(mat, path):
    data = mat.data if isinstance(mat, OperatorMatrix) else np.asarray(mat)
    rows, cols = data.shape
    kind = "complex" if np.iscomplexobj(data) else "real"
    with open(path, "w") as f:
        f.write(f"{MAT_MAGIC} {rows} {cols} {kind}\n")
        for row in data:
            if kind == "complex":
                f.write(" ".join(f"{v.real!r} {v.imag!r}" for v in row) + "\n")
            else:
                f.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path):
    with open(path) as f:
        header = f.readline().split()
        if not header or header[0] != MAT_MAGIC:
            raise ValueError(f"not a {MAT_MAGIC} file: {path}")
        rows, cols, kind = int(header[1]), int(header[2]), header[3]
        vals = np.array(f.read().split(), dtype=float)
    if kind == "complex":
        vals = vals[0::2] + 1j * vals[1::2]
    return OperatorMatrix(vals.reshape(rows, cols))
