"""Generator bases of su(4), commutators, structure constants, adjoint maps.

Two concrete bases are provided:

* the spinor basis, the 15 two-qubit products ``{1 (x) s_i, s_i (x) 1,
  s_i (x) s_j}`` with ``tr(T_i T_j) = 4 d_ij``, labelled by two-letter
  strings such as ``"XX"`` (first letter = first qubit);
* the lambda basis, 15 Gell-Mann-style matrices with ``tr(l_i l_j) = 2 d_ij``.

Conventions used throughout the package:

* structure constants obey ``[T_i, T_j] = i f_ijk T_k``;
* the adjoint matrix of a Hamiltonian H in a basis {T_i} is the matrix of
  the linear map ``X -> [H, X]``, i.e. column j holds the expansion
  coefficients of ``[H, T_j]``.  For Hermitian H in these bases ``i A`` is
  real antisymmetric, so the coefficient flow ``g' = -i A g`` is a rotation
  and ``|g|`` is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

import numpy as np

__all__ = [
    "PAULI",
    "GeneratorBasis",
    "spinor_basis",
    "lambda_basis",
    "pauli_basis",
    "commutator",
    "StructureConstants",
    "structure_constants",
    "commutator_table",
    "AdjointMatrix",
    "adjoint_rep",
    "ClosureError",
    "BasisError",
    "SPINOR_ORDER",
]

_I2 = np.eye(2, dtype=complex)
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)

PAULI = {"1": _I2, "X": _SX, "Y": _SY, "Z": _SZ}

#: Canonical spinor ordering; the printed sector orderings elsewhere are
#: realized as named reorderings in :mod:`fourlevel.reduction`.
SPINOR_ORDER = (
    "1X", "1Y", "1Z",
    "X1", "Y1", "Z1",
    "XX", "XY", "XZ",
    "YX", "YY", "YZ",
    "ZX", "ZY", "ZZ",
)

ZERO_TOL = 1e-12  # computed structure constants below this are exact zeros


class ClosureError(ValueError):
    """A commutator left the span of the basis (basis not closed)."""


class BasisError(ValueError):
    """A commutator is not a single signed generator of the basis."""


def commutator(a, b):
    """Matrix commutator ``a b - b a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a @ b - b @ a


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """An ordered, trace-orthogonal set of Hermitian generators.

    ``norm`` is the common normalization ``tr(T_i T_i)`` (4 for the spinor
    basis, 2 for the lambda and Pauli bases); transform formulas divide by
    it.  Instances are immutable; the cached factory functions below return
    shared singletons safe for concurrent reads.
    """

    name: str
    labels: tuple
    matrices: np.ndarray  # (n, d, d) complex, read-only
    norm: float

    def __post_init__(self):
        self.matrices.setflags(write=False)

    @property
    def dim(self):
        return len(self.labels)

    def index(self, label):
        return self.labels.index(label)

    def matrix(self, label):
        return self.matrices[self.index(label)]

    def project(self, m):
        """Expansion coefficients of matrix ``m`` over the basis."""
        m = np.asarray(m, dtype=complex)
        return np.einsum("kij,ji->k", self.matrices, m) / self.norm

    def assemble(self, coeffs):
        """Matrix ``sum_i c_i T_i`` from a coefficient vector."""
        coeffs = np.asarray(coeffs)
        return np.tensordot(coeffs, self.matrices, axes=(0, 0))

    def subset(self, labels):
        """Sub-basis on the given labels (same normalization), e.g. a sector."""
        idx = [self.index(l) for l in labels]
        return GeneratorBasis(f"{self.name}-subset", tuple(labels),
                              self.matrices[idx].copy(), self.norm)

    def __repr__(self):
        return f"GeneratorBasis({self.name!r}, dim={self.dim})"


def _kron(label):
    return np.kron(PAULI[label[0]], PAULI[label[1]])


@lru_cache(maxsize=None)
def spinor_basis():
    """The 15 spinor generators of su(4) in canonical order."""
    mats = np.stack([_kron(lab) for lab in SPINOR_ORDER])
    return GeneratorBasis("spinor", SPINOR_ORDER, mats, 4.0)


@lru_cache(maxsize=None)
def pauli_basis():
    """Pauli su(2) basis {s_x, s_y, s_z}, ``tr(s_i s_j) = 2 d_ij``."""
    return GeneratorBasis("pauli", ("X", "Y", "Z"), np.stack([_SX, _SY, _SZ]), 2.0)


def _lambda_matrices():
    ls = np.zeros((15, 4, 4), dtype=complex)

    def sym(a, b):
        m = np.zeros((4, 4), dtype=complex)
        m[a, b] = m[b, a] = 1
        return m

    def asym(a, b):
        m = np.zeros((4, 4), dtype=complex)
        m[a, b] = -1j
        m[b, a] = 1j
        return m

    ls[0] = sym(0, 1)
    ls[1] = asym(0, 1)
    ls[2] = np.diag([1, -1, 0, 0]).astype(complex)
    ls[3] = sym(0, 2)
    ls[4] = asym(0, 2)
    ls[5] = sym(1, 2)
    ls[6] = asym(1, 2)
    ls[7] = np.diag([1, 1, -2, 0]).astype(complex) / np.sqrt(3)
    ls[8] = sym(0, 3)
    ls[9] = asym(0, 3)
    ls[10] = sym(1, 3)
    ls[11] = asym(1, 3)
    ls[12] = sym(2, 3)
    ls[13] = asym(2, 3)
    ls[14] = np.diag([1, 1, 1, -3]).astype(complex) / np.sqrt(6)
    return ls


@lru_cache(maxsize=None)
def lambda_basis():
    """The 15 Gell-Mann-style generators l_1..l_15, ``tr(l_i l_j) = 2 d_ij``."""
    labels = tuple(f"l{k}" for k in range(1, 16))
    return GeneratorBasis("lambda", labels, _lambda_matrices(), 2.0)


#: Spinor-product identities for the lambda generators, as (factor, lambda
#: index, spinor expansion {label: coefficient}) with factor*l_k = sum.
LAMBDA_SPINOR_RELATIONS = (
    (2.0, 1, {"1X": 1.0, "ZX": 1.0}),            # 2 l1 = (1+Z)(x)X
    (2.0, 2, {"1Y": 1.0, "ZY": 1.0}),
    (2.0, 3, {"1Z": 1.0, "ZZ": 1.0}),
    (2.0, 4, {"X1": 1.0, "XZ": 1.0}),            # 2 l4 = X(x)(1+Z)
    (2.0, 5, {"Y1": 1.0, "YZ": 1.0}),
    (2.0, 6, {"XX": 1.0, "YY": 1.0}),
    (2.0, 7, {"YX": 1.0, "XY": -1.0}),
    (2.0 * np.sqrt(3), 8, {"Z1": 2.0, "1Z": -1.0, "ZZ": 1.0}),
    (np.sqrt(6), 15, {"Z1": 1.0, "1Z": 1.0, "ZZ": -1.0}),
)


def _permutation_sign(triple):
    """Sign of the permutation taking ``triple`` onto sorted order."""
    i, j, k = triple
    sign = 1.0
    if i > j:
        i, j = j, i
        sign = -sign
    if j > k:
        j, k = k, j
        sign = -sign
    if i > j:
        i, j = j, i
        sign = -sign
    return sign


class StructureConstants:
    """Totally antisymmetric table f_ijk with ``[T_i, T_j] = i f_ijk T_k``.

    Entries are stored for ordered triples ``i < j < k`` (0-based indices);
    lookups apply the permutation sign.
    """

    def __init__(self, basis, table):
        self.basis = basis
        self.table = dict(table)

    def __call__(self, i, j, k):
        if len({i, j, k}) < 3:
            return 0.0
        return _permutation_sign((i, j, k)) * self.table.get(tuple(sorted((i, j, k))), 0.0)

    def nonzero(self):
        """Sorted list of (i, j, k, f_ijk) over ordered triples i<j<k."""
        return [(i, j, k, v) for (i, j, k), v in sorted(self.table.items())]

    def jacobi_residual(self, samples=None):
        """Max |f_ijm f_mkl + f_jkm f_mil + f_kim f_mjl| over index tuples."""
        n = self.basis.dim
        f = np.zeros((n, n, n))
        for (i, j, k), v in self.table.items():
            for (a, b, c) in permutations((i, j, k)):
                f[a, b, c] = self(a, b, c)
        lhs = (np.einsum("ijm,mkl->ijkl", f, f)
               + np.einsum("jkm,mil->ijkl", f, f)
               + np.einsum("kim,mjl->ijkl", f, f))
        return float(np.abs(lhs).max())

    def __repr__(self):
        return f"StructureConstants({self.basis.name!r}, {len(self.table)} triples)"


def structure_constants(basis, tol=ZERO_TOL):
    """Compute f_ijk = tr([T_i, T_j] T_k) / (i tr(T_k T_k)) for a basis.

    Raises :class:`ClosureError` if some commutator is not reproduced by its
    expansion over the basis (non-closed set).
    """
    n = basis.dim
    table = {}
    for i in range(n):
        for j in range(i + 1, n):
            c = commutator(basis.matrices[i], basis.matrices[j])
            coeffs = basis.project(c) / 1j
            recon = 1j * basis.assemble(coeffs)
            if np.abs(recon - c).max() > 100 * tol:
                raise ClosureError(
                    f"[{basis.labels[i]}, {basis.labels[j]}] is outside the"
                    f" span of basis {basis.name!r}")
            if np.abs(coeffs.imag).max() > 100 * tol:
                raise ClosureError(
                    f"non-real structure constant for [{basis.labels[i]},"
                    f" {basis.labels[j]}]")
            for k in np.flatnonzero(np.abs(coeffs) > tol):
                triple = (i, j, int(k))
                table[tuple(sorted(triple))] = float(coeffs[k].real) * _permutation_sign(triple)
    return StructureConstants(basis, table)


@lru_cache(maxsize=None)
def commutator_table(basis):
    """Single-generator commutation table for bases like the spinor one.

    Returns a dict ``(i, j) -> (k, c)`` with ``[T_i, T_j] = c T_k`` (``None``
    for vanishing commutators).  Raises :class:`BasisError` if any commutator
    is a combination of more than one generator, which cannot happen in the
    spinor basis but does in the lambda basis.
    """
    n = basis.dim
    table = {}
    for i in range(n):
        for j in range(n):
            c = commutator(basis.matrices[i], basis.matrices[j])
            coeffs = basis.project(c)
            hits = np.flatnonzero(np.abs(coeffs) > 1e-9)
            if len(hits) == 0:
                table[(i, j)] = None
            elif len(hits) == 1:
                k = int(hits[0])
                table[(i, j)] = (k, complex(coeffs[k]))
            else:
                raise BasisError(
                    f"[{basis.labels[i]}, {basis.labels[j]}] spans "
                    f"{len(hits)} generators of basis {basis.name!r}; "
                    "single-generator closure requires the spinor basis")
    return table


class AdjointMatrix:
    """Time-parameterized adjoint matrix A(t) of a Hamiltonian.

    Stored as a sum ``A(t) = sum_m c_m(t) P_m`` over constant matrices, one
    per Hamiltonian coefficient, so evaluation is exact and cheap.  ``iA(t)``
    is real antisymmetric for every t (checked on construction at t=0).

    ``labels`` names the (sub-)basis rows/columns; ``restrict`` extracts a
    sector block.
    """

    def __init__(self, basis, terms, labels=None, indices=None, hamiltonian=None):
        self.basis = basis
        self.terms = tuple((fn, np.asarray(mat, dtype=complex)) for fn, mat in terms)
        self.labels = tuple(labels) if labels is not None else basis.labels
        self.indices = tuple(indices) if indices is not None else tuple(range(basis.dim))
        self.dim = len(self.labels)
        self.hamiltonian = hamiltonian
        for _, mat in self.terms:
            if mat.shape != (self.dim, self.dim):
                raise ValueError("adjoint term shape mismatch")

    def at(self, t):
        """Evaluate A(t) as a dense complex matrix."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for fn, mat in self.terms:
            out += fn(t) * mat
        return out

    __call__ = at

    def rotation_generator(self, t, tol=1e-10):
        """Real antisymmetric W(t) = iA(t); raises if iA is not real."""
        w = 1j * self.at(t)
        if np.abs(w.imag).max() > tol * max(1.0, np.abs(w.real).max()):
            raise ValueError("iA(t) is not real; Hamiltonian not Hermitian?")
        return w.real

    def restrict(self, indices):
        """Sub-block on the given row/column positions (sector restriction)."""
        idx = np.asarray(indices, dtype=int)
        terms = [(fn, mat[np.ix_(idx, idx)]) for fn, mat in self.terms]
        return AdjointMatrix(
            self.basis, terms,
            labels=[self.labels[i] for i in idx],
            indices=[self.indices[i] for i in idx],
            hamiltonian=self.hamiltonian)

    def __repr__(self):
        return f"AdjointMatrix(dim={self.dim}, basis={self.basis.name!r})"


def _ad_matrix_of(m, basis):
    """Matrix of X -> [m, X] over the basis (column j = expansion of [m, T_j])."""
    n = basis.dim
    cols = [basis.project(commutator(m, basis.matrices[j])) for j in range(n)]
    return np.stack(cols, axis=1)


def adjoint_rep(h, basis):
    """Adjoint matrix of a Hamiltonian over a generator basis.

    ``h`` may be a :class:`~fourlevel.hamiltonian.HamiltonianSpec` (giving a
    time-parameterized matrix), a coefficient vector over ``basis``, or a
    dense Hermitian matrix (both giving a constant matrix).  In all cases the
    result satisfies the coefficient flow ``0 = g' + i A g`` for invariants
    ``I = sum_i g_i T_i``.
    """
    from .hamiltonian import HamiltonianSpec  # deferred; avoids cycle

    if isinstance(h, HamiltonianSpec):
        terms = []
        for label, fn in h.coefficient_map().items():
            p = _ad_matrix_of(spinor_basis().matrix(label), basis)
            terms.append((fn, p))
        return AdjointMatrix(basis, terms, hamiltonian=h)

    h = np.asarray(h)
    if h.ndim == 1:
        if h.shape[0] != basis.dim:
            raise ValueError(f"coefficient vector length {h.shape[0]} != basis dim {basis.dim}")
        m = basis.assemble(h)
    elif h.ndim == 2:
        m = h.astype(complex)
    else:
        raise ValueError("h must be a HamiltonianSpec, coefficient vector or matrix")
    a = _ad_matrix_of(m, basis)
    return AdjointMatrix(basis, [(lambda t: 1.0, a)])
