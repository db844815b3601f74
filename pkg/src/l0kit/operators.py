"""Sensing operators: dense random ensembles and a matrix-free partial DCT."""

import struct

import numpy as np
from scipy.fft import dct, idct

__all__ = [
    "SensingOperator",
    "DenseOperator",
    "PartialDctOperator",
    "CustomOperator",
    "gen_gaussian_operator",
    "gen_bernoulli_operator",
    "gen_partial_dct_operator",
    "save_operator_binary",
    "load_operator_binary",
    "save_operator_csv",
    "load_operator_csv",
]

_MAGIC = b"L0OP"


class SensingOperator:
    """Measurement map from R^p to R^n with adjoint and column access.

    Operators are immutable after construction and safe to share across
    concurrent solver runs.
    """

    kind = "custom-operator"

    def __init__(self, n, p, columns_normalized=False):
        n, p = int(n), int(p)
        if n < 1 or p < 1:
            raise ValueError(f"operator dimensions must be positive, got n={n}, p={p}")
        self.n = n
        self.p = p
        self.columns_normalized = bool(columns_normalized)

    @property
    def shape(self):
        return (self.n, self.p)

    def apply(self, x):
        raise NotImplementedError

    def adjoint_apply(self, r):
        raise NotImplementedError

    def column(self, i):
        raise NotImplementedError

    def columns(self, indices):
        """Dense n x k submatrix for the given column indices."""
        indices = np.asarray(indices, dtype=np.intp)
        out = np.empty((self.n, indices.size))
        for j, i in enumerate(indices):
            out[:, j] = self.column(int(i))
        return out

    def dual(self, y, x):
        """Correlation of the residual with the columns: Psi^t (y - Psi x)."""
        return self.adjoint_apply(y - self.apply(x))

    def _check_apply_dim(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.p,):
            raise ValueError(f"expected input of shape ({self.p},), got {x.shape}")
        return x

    def _check_adjoint_dim(self, r):
        r = np.asarray(r, dtype=float)
        if r.shape != (self.n,):
            raise ValueError(f"expected input of shape ({self.n},), got {r.shape}")
        return r


class DenseOperator(SensingOperator):
    """Sensing operator backed by an explicit n x p matrix."""

    kind = "dense"

    def __init__(self, mat, columns_normalized=None):
        mat = np.ascontiguousarray(mat, dtype=float)
        if mat.ndim != 2:
            raise ValueError("dense operator needs a 2-d array")
        if columns_normalized is None:
            norms = np.linalg.norm(mat, axis=0)
            columns_normalized = bool(np.all(np.abs(norms - 1.0) <= 1e-12))
        super().__init__(mat.shape[0], mat.shape[1], columns_normalized)
        self.mat = mat

    def apply(self, x):
        return self.mat @ self._check_apply_dim(x)

    def adjoint_apply(self, r):
        return self.mat.T @ self._check_adjoint_dim(r)

    def column(self, i):
        return self.mat[:, i].copy()

    def columns(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        return self.mat[:, indices]


class PartialDctOperator(SensingOperator):
    """Rows of the p x p orthonormal DCT-II matrix, columns rescaled to unit norm.

    apply/adjoint_apply run through the fast transform in O(p log p); columns
    are materialized on demand.
    """

    kind = "partial-dct"

    def __init__(self, p, rows, col_norms=None):
        rows = np.asarray(rows, dtype=np.intp)
        if rows.size > p:
            raise ValueError(f"cannot select {rows.size} rows from a {p} x {p} transform")
        if np.unique(rows).size != rows.size:
            raise ValueError("row selection must be without replacement")
        super().__init__(rows.size, p, columns_normalized=True)
        self.rows = np.sort(rows)
        if col_norms is None:
            col_norms = self._selected_row_norms()
        if np.any(col_norms < 1e-12):
            raise ValueError("row selection produced a numerically zero column")
        self._col_scale = 1.0 / col_norms

    def _selected_row_norms(self):
        # norm of column j over the selected rows, accumulated in row blocks
        sq = np.zeros(self.p)
        block = 128
        for start in range(0, self.n, block):
            sel = self.rows[start:start + block]
            basis = np.zeros((self.p, sel.size))
            basis[sel, np.arange(sel.size)] = 1.0
            rows_of_c = idct(basis, axis=0, norm="ortho")
            sq += np.sum(rows_of_c**2, axis=1)
        return np.sqrt(sq)

    def apply(self, x):
        x = self._check_apply_dim(x)
        return dct(x * self._col_scale, norm="ortho")[self.rows]

    def adjoint_apply(self, r):
        r = self._check_adjoint_dim(r)
        z = np.zeros(self.p)
        z[self.rows] = r
        return idct(z, norm="ortho") * self._col_scale

    def column(self, i):
        e = np.zeros(self.p)
        e[i] = self._col_scale[i]
        return dct(e, norm="ortho")[self.rows]


class CustomOperator(SensingOperator):
    """Sensing operator from user-supplied apply/adjoint callables.

    ``column_fn`` is optional; columns default to apply on basis vectors.
    """

    def __init__(self, n, p, apply_fn, adjoint_fn, column_fn=None,
                 columns_normalized=False):
        super().__init__(n, p, columns_normalized)
        self._apply_fn = apply_fn
        self._adjoint_fn = adjoint_fn
        self._column_fn = column_fn

    def apply(self, x):
        return np.asarray(self._apply_fn(self._check_apply_dim(x)), dtype=float)

    def adjoint_apply(self, r):
        return np.asarray(self._adjoint_fn(self._check_adjoint_dim(r)), dtype=float)

    def column(self, i):
        if self._column_fn is not None:
            return np.asarray(self._column_fn(int(i)), dtype=float)
        e = np.zeros(self.p)
        e[i] = 1.0
        return self.apply(e)


def gen_gaussian_operator(n, p, seed):
    """Random Gaussian matrix with every column scaled to unit norm."""
    _check_gen_dims(n, p)
    rng = np.random.default_rng(seed)
    mat = rng.standard_normal((n, p))
    mat /= np.linalg.norm(mat, axis=0)
    return DenseOperator(mat, columns_normalized=True)


def gen_bernoulli_operator(n, p, seed):
    """Random Bernoulli matrix with entries +-1/sqrt(n); columns have exact unit norm."""
    _check_gen_dims(n, p)
    rng = np.random.default_rng(seed)
    mat = rng.choice([-1.0, 1.0], size=(n, p)) / np.sqrt(n)
    return DenseOperator(mat, columns_normalized=True)


def gen_partial_dct_operator(n, p, seed):
    """n rows sampled uniformly without replacement from the p x p orthonormal
    DCT-II matrix, columns renormalized to unit norm."""
    _check_gen_dims(n, p)
    rng = np.random.default_rng(seed)
    rows = rng.choice(p, size=n, replace=False)
    return PartialDctOperator(p, rows)


def _check_gen_dims(n, p):
    if n < 1 or p < 1:
        raise ValueError(f"operator dimensions must be positive, got n={n}, p={p}")
    if n > p:
        raise ValueError(f"need n <= p, got n={n} > p={p}")


def save_operator_binary(op, path):
    """Write a dense operator: magic 'L0OP', u32 n, u32 p, f64 column-major data,
    all little-endian."""
    mat = _dense_matrix(op)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII", _MAGIC, op.n, op.p))
        fh.write(np.asfortranarray(mat, dtype="<f8").tobytes(order="F"))


def load_operator_binary(path):
    with open(path, "rb") as fh:
        header = fh.read(12)
        if len(header) != 12:
            raise ValueError(f"truncated operator file: {path}")
        magic, n, p = struct.unpack("<4sII", header)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r} in {path}")
        data = np.frombuffer(fh.read(8 * n * p), dtype="<f8")
        if data.size != n * p:
            raise ValueError(f"truncated operator data in {path}")
    return DenseOperator(data.reshape((n, p), order="F"))


def save_operator_csv(op, path):
    np.savetxt(path, _dense_matrix(op), delimiter=",")


def load_operator_csv(path):
    return DenseOperator(np.atleast_2d(np.loadtxt(path, delimiter=",")))


def _dense_matrix(op):
    if isinstance(op, DenseOperator):
        return op.mat
    return op.columns(np.arange(op.p))
