"""Subalgebra classification and sector decomposition of the coefficient flow.

Given a Hamiltonian of the nine-coefficient family, this module determines

* the commutator closure of its generator set (the span of the superset-type
  invariant),
* a subalgebra label for that span (su(2), su(2)+u(1), so(4), so(4)+u(1),
  so(5), su(4), or unknown) from dimension, center and ambient commutant,
* the block decomposition of the adjoint matrix into superset-type (S),
  disjoint-type (D) and u(1) sectors, sampling A(t) at several times so an
  accidental zero at one instant cannot merge or split blocks,
* the signed D-type generator sets, with signs fixed by the u(1) charge
  conjugation relations [Q, D] = -2i Dbar, [Q, Dbar] = +2i D,
* the obstruction report showing why no su(3) superset-type invariant exists
  for this family.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .generators import commutator, commutator_table, lambda_basis, spinor_basis
from .hamiltonian import COEFF_LABELS, COEFF_NAMES

__all__ = [
    "GeneratorSet",
    "SubalgebraLabel",
    "SectorBlock",
    "SectorDecomposition",
    "commutator_closure",
    "identify_subalgebra",
    "sector_decompose",
    "enumerate_dtype",
    "su3_exclusion_check",
    "Su3ExclusionReport",
    "lambda_weights",
    "ConjugationError",
]


class ConjugationError(ValueError):
    """Sign assignment inconsistent with the charge-conjugation relations."""


@dataclass(frozen=True)
class GeneratorSet:
    """An ordered set of (optionally signed) generators of a basis."""

    basis: object
    indices: tuple
    signs: tuple = None

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("duplicate generator indices")
        if any(i < 0 or i >= self.basis.dim for i in self.indices):
            raise ValueError("generator index outside basis")
        if self.signs is None:
            object.__setattr__(self, "signs", (1,) * len(self.indices))
        elif len(self.signs) != len(self.indices):
            raise ValueError("signs/indices length mismatch")

    @staticmethod
    def from_labels(basis, labels, signs=None):
        return GeneratorSet(basis, tuple(basis.index(l) for l in labels),
                            None if signs is None else tuple(signs))

    @property
    def labels(self):
        return tuple(self.basis.labels[i] for i in self.indices)

    @property
    def signed_labels(self):
        return tuple(l if s > 0 else "-" + l for l, s in zip(self.labels, self.signs))

    def matrices(self):
        return np.stack([s * self.basis.matrices[i]
                         for i, s in zip(self.indices, self.signs)])

    def __len__(self):
        return len(self.indices)

    def index_set(self):
        return frozenset(self.indices)


@dataclass(frozen=True)
class SubalgebraLabel:
    name: str            # su(2), su(2)+u(1), so(4), so(4)+u(1), so(5), su(4), unknown
    dimension: int       # 3, 4, 6, 7, 10, 15 (or the raw span size for unknown)
    u1_label: str = None      # ambient or internal u(1) generator, when present
    pattern: str = None       # matched catalogue pattern, as a cross-check

    def __str__(self):
        extra = f" [u(1): {self.u1_label}]" if self.u1_label else ""
        return f"{self.name} (dim {self.dimension}){extra}"


def commutator_closure(seed):
    """Smallest superset of ``seed`` closed under pairwise commutation.

    Coefficients are ignored: in the spinor basis every commutator of two
    generators is a single generator, so closure is pure index bookkeeping.
    Using a basis where commutators mix generators raises
    :class:`~fourlevel.generators.BasisError`.
    """
    if len(seed) == 0:
        raise ValueError("closure of an empty generator set")
    table = commutator_table(seed.basis)
    members = set(seed.indices)
    frontier = list(members)
    while frontier:
        new = set()
        for i in frontier:
            for j in members:
                for pair in ((i, j), (j, i)):
                    hit = table[pair]
                    if hit is not None and hit[0] not in members and hit[0] not in new:
                        new.add(hit[0])
        members |= new
        frontier = sorted(new)
    return GeneratorSet(seed.basis, tuple(sorted(members)))


def _commuting_pairs(basis, members, tol=1e-12):
    """Members of ``members`` commuting with every member (the center)."""
    mats = basis.matrices
    center = []
    for i in members:
        if all(np.abs(commutator(mats[i], mats[j])).max() < tol for j in members):
            center.append(i)
    return center


def _ambient_commutant(basis, members, tol=1e-12):
    """Basis generators outside ``members`` commuting with all of them."""
    mats = basis.matrices
    out = []
    for q in range(basis.dim):
        if q in members:
            continue
        if all(np.abs(commutator(mats[q], mats[j])).max() < tol for j in members):
            out.append(q)
    return out


_CATALOGUE = (
    # S-sector label patterns; axes i, j, k are distinct, "*" expands to X, Y, Z
    ("so(4)", (("i", "j"), ("j", "j"), ("k", "1"), ("k", "i"), ("k", "k"), ("1", "j"))),
    ("so(4)+u(1) form 1", (("1", "*"), ("i", "*"))),
    ("so(4)+u(1) form 2", (("i", "1"), ("1", "j"), ("j", "k"), ("j", "i"), ("k", "i"), ("k", "k"))),
    ("so(4)+u(1) form 3", (("i", "1"), ("1", "i"), ("j", "k"), ("j", "j"), ("k", "j"), ("k", "k"))),
    ("so(5)", (("i", "1"), ("1", "*"), ("j", "*"), ("k", "*"))),
)


def _match_catalogue_pattern(labels):
    """Cross-check a spinor label set against the subalgebra catalogue.

    Patterns are tried for every assignment of distinct axes (i, j, k) and
    for the qubit-swapped mirror of each entry.  Returns a descriptor string
    or None.
    """
    target = frozenset(labels)

    def expand(pattern, i, j, k):
        table = {"i": i, "j": j, "k": k, "1": "1"}
        out = []
        for a, b in pattern:
            firsts = "XYZ" if a == "*" else (table[a],)
            seconds = "XYZ" if b == "*" else (table[b],)
            out.extend(fa + fb for fa in firsts for fb in seconds)
        return out

    for name, pattern in _CATALOGUE:
        for (i, j, k) in permutations("XYZ"):
            expanded = expand(pattern, i, j, k)
            for flip in (False, True):
                cand = frozenset(l[1] + l[0] if flip else l for l in expanded)
                if cand == target:
                    axes = f"(i,j,k)=({i},{j},{k})" + (", qubits swapped" if flip else "")
                    return f"{name} with {axes}"
    return None


def identify_subalgebra(span):
    """Label a commutation-closed generator set.

    Uses dimension plus center detection; an ambient u(1) commutant promotes
    a six-dimensional so(4) span to so(4)+u(1) (the D sector then splits).
    Catalogue patterns are attached as a cross-check when they match.
    Unexpected closed dimensions yield the label ``unknown``.
    """
    basis = span.basis
    members = list(span.indices)
    dim = len(members)
    center = _commuting_pairs(basis, members)
    pattern = None
    if basis.name == "spinor":
        pattern = _match_catalogue_pattern(span.labels)

    def lab(i):
        return basis.labels[i]

    if dim == 3 and not center:
        return SubalgebraLabel("su(2)", 3, pattern=pattern)
    if dim == 4 and len(center) == 1:
        return SubalgebraLabel("su(2)+u(1)", 4, u1_label=lab(center[0]), pattern=pattern)
    if dim == 6 and not center:
        commutant = _ambient_commutant(basis, set(members))
        if commutant:
            return SubalgebraLabel("so(4)+u(1)", 7, u1_label=lab(commutant[0]), pattern=pattern)
        return SubalgebraLabel("so(4)", 6, pattern=pattern)
    if dim == 7 and len(center) == 1:
        return SubalgebraLabel("so(4)+u(1)", 7, u1_label=lab(center[0]), pattern=pattern)
    if dim == 10 and not center:
        return SubalgebraLabel("so(5)", 10, pattern=pattern)
    if dim == 15:
        return SubalgebraLabel("su(4)", 15, pattern=pattern)
    return SubalgebraLabel("unknown", dim, pattern=pattern)


@dataclass(frozen=True)
class SectorBlock:
    indices: tuple       # positions within the adjoint matrix ordering
    labels: tuple
    kind: str            # "S", "D" or "U1"
    dimension_label: str


@dataclass(frozen=True)
class SectorDecomposition:
    blocks: tuple
    basis: object
    sample_times: tuple
    u1_generator: int = None   # position of the first u(1) singleton, if any

    def block_sizes(self):
        return [len(b.indices) for b in self.blocks]

    def sector(self, kind):
        return [b for b in self.blocks if b.kind == kind]


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def _default_sample_times(t0, tf, count=8):
    # low-discrepancy, deterministic; avoids accidental zeros of the drives
    frac = (0.5 + _GOLDEN * np.arange(1, count + 1)) % 1.0
    return t0 + (tf - t0) * frac


def sector_decompose(a, sample_times, h=None, tol=1e-12):
    """Split an adjoint matrix into connected blocks (S / D / u(1) sectors).

    The nonzero pattern of A(t) is unioned over ``sample_times`` plus eight
    deterministic low-discrepancy times in their range, then connected
    components are read off.  The block containing the Hamiltonian's
    generator set is S-type; zero singletons are u(1); the rest are D-type.
    """
    times = np.atleast_1d(np.asarray(sample_times, dtype=float))
    if times.size == 0:
        raise ValueError("sample_times must be non-empty")
    if h is None:
        h = getattr(a, "hamiltonian", None)
    if h is None:
        raise ValueError("no HamiltonianSpec available to identify the S sector")

    all_times = np.concatenate([times, _default_sample_times(times.min(), times.max())])
    n = a.dim
    pattern = np.zeros((n, n), dtype=bool)
    for t in all_times:
        m = np.abs(a.at(t))
        pattern |= m > tol * max(1.0, m.max())
    pattern |= pattern.T

    # connected components
    unseen = set(range(n))
    comps = []
    while unseen:
        start = min(unseen)
        stack = [start]
        comp = {start}
        unseen.discard(start)
        while stack:
            v = stack.pop()
            for w in np.flatnonzero(pattern[v]):
                w = int(w)
                if w in unseen:
                    unseen.discard(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=min)

    h_positions = set()
    for lab in h.active_labels(all_times):
        if lab in a.labels:
            h_positions.add(a.labels.index(lab))

    blocks = []
    u1 = None
    for comp in comps:
        labels = tuple(a.labels[i] for i in comp)
        if h_positions & set(comp):
            kind = "S"
        elif len(comp) == 1 and not pattern[comp[0]].any():
            kind = "U1"
            if u1 is None:
                u1 = comp[0]
        else:
            kind = "D"
        blocks.append(SectorBlock(comp, labels, kind, str(len(comp))))
    return SectorDecomposition(tuple(blocks), a.basis, tuple(all_times), u1_generator=u1)


def enumerate_dtype(decomp, a):
    """Signed D-type generator sets of a decomposition.

    With a u(1) generator Q and two D blocks, signs are fixed so that the
    charge-conjugation relations hold elementwise for the returned pair
    (first set all-positive); both directions are verified and a failure
    raises :class:`ConjugationError`.  Without a u(1) generator the D blocks
    are returned with positive signs.
    """
    basis = a.basis
    d_blocks = decomp.sector("D")
    sets = []
    q_pos = decomp.u1_generator

    if q_pos is None or len(d_blocks) != 2:
        for b in d_blocks:
            sets.append(GeneratorSet(basis, tuple(a.indices[i] for i in b.indices)))
        return sets

    table = commutator_table(basis)
    q_idx = a.indices[q_pos]
    first, second = sorted(d_blocks, key=lambda b: min(b.indices))
    d_indices = tuple(a.indices[i] for i in first.indices)
    second_set = set(a.indices[i] for i in second.indices)

    dbar_indices = []
    dbar_signs = []
    for di in d_indices:
        hit = table[(q_idx, di)]
        if hit is None:
            raise ConjugationError(
                f"[{basis.labels[q_idx]}, {basis.labels[di]}] vanishes; not a conjugate pair")
        k, c = hit
        if k not in second_set:
            raise ConjugationError(
                f"[{basis.labels[q_idx]}, {basis.labels[di]}] leaves the partner block")
        sign = c / (-2j)
        if abs(sign.imag) > 1e-12 or abs(abs(sign.real) - 1.0) > 1e-12:
            raise ConjugationError(f"unexpected conjugation coefficient {c!r}")
        sign = int(round(sign.real))
        # verify the reverse relation [Q, sign*T_k] = +2i T_di
        back_k, back_c = table[(q_idx, k)]
        if back_k != di or abs(sign * back_c - 2j) > 1e-12:
            raise ConjugationError(
                f"reverse conjugation failed for {basis.labels[di]} <-> {basis.labels[k]}")
        dbar_indices.append(k)
        dbar_signs.append(sign)

    sets.append(GeneratorSet(basis, d_indices))
    sets.append(GeneratorSet(basis, tuple(dbar_indices), tuple(dbar_signs)))
    return sets


# -- su(3) obstruction --------------------------------------------------------


def lambda_weights():
    """Constant 15x9 matrix W with (2H over lambda basis) = W @ coefficients.

    Row k gives the lambda_{k+1} coefficient of 2H as a linear combination of
    the nine Hamiltonian coefficients in canonical order.
    """
    lam = lambda_basis()
    spin = spinor_basis()
    w = np.zeros((15, 9))
    for m, lab in enumerate(COEFF_LABELS):
        coeffs = lam.project(2.0 * spin.matrix(lab))
        if np.abs(coeffs.imag).max() > 1e-12:
            raise AssertionError("lambda expansion produced complex weights")
        w[:, m] = coeffs.real
    return w


def lambda_expansion(h, t):
    """Coefficients of 2 H(t) over the lambda basis."""
    return lambda_weights() @ h.coefficient_vector(t)


@dataclass(frozen=True)
class Su3ExclusionReport:
    """Why the family admits no su(3) superset-type invariant.

    ``constraints_forced`` lists what must vanish (or coincide) to remove
    the lambda_9..lambda_14 components; even then the surviving generator
    span has dimension ``residual_span_dim`` (4: an su(2)+u(1) inside
    su(3)+u(1)), so ``feasible`` is always False.
    """

    constraints_forced: tuple
    constraints_satisfied: bool
    residual_span_dim: int
    residual_lambdas: tuple
    feasible: bool
    reason: str


def su3_exclusion_check(h, times=None, tol=1e-12):
    """Report the constraint set killing lambda_9..14 and the surviving span."""
    w = lambda_weights()
    names = list(COEFF_NAMES)

    constraints = []
    constrained_zero = set()
    equal_pairs = []
    for row in range(8, 14):  # lambda_9 .. lambda_14
        nz = np.flatnonzero(np.abs(w[row]) > tol)
        if len(nz) == 0:
            continue
        if len(nz) == 1:
            constrained_zero.add(int(nz[0]))
        elif len(nz) == 2 and abs(w[row, nz[0]] + w[row, nz[1]]) < tol:
            equal_pairs.append((int(nz[0]), int(nz[1])))
        else:
            raise AssertionError(f"unexpected lambda row structure at row {row}")
    constraints = [f"{names[m]} = 0" for m in sorted(constrained_zero)]
    constraints += [f"{names[a]} = {names[b]}" for a, b in sorted(set(equal_pairs))]

    # does the supplied Hamiltonian already satisfy them?
    sample = np.linspace(0.0, 1.0, 7) if times is None else np.asarray(times, dtype=float)
    active = set(h.active_names(sample))
    satisfied = all(names[m] not in active for m in constrained_zero)
    for a, b in equal_pairs:
        diff = max(abs(h.coefficients[a](t) - h.coefficients[b](t)) for t in sample)
        satisfied = satisfied and diff < 1e-10

    # impose the constraints (zero the transverse fields, J_y := J_x) on the
    # supplied coefficients and count surviving lambda components
    residual = []
    for row in range(15):
        vals = []
        for t in sample:
            coeffs = h.coefficient_vector(t)
            for m in constrained_zero:
                coeffs[m] = 0.0
            for a, b in equal_pairs:
                coeffs[b] = coeffs[a]
            vals.append(w[row] @ coeffs)
        if max(abs(v) for v in vals) > tol:
            residual.append(row + 1)

    return Su3ExclusionReport(
        constraints_forced=tuple(constraints),
        constraints_satisfied=satisfied,
        residual_span_dim=len(residual),
        residual_lambdas=tuple(residual),
        feasible=False,
        reason=("removing the lambda_9..14 components forces the constraints"
                " and leaves an su(2)+u(1) span, never the eight-dimensional"
                " su(3)"),
    )
