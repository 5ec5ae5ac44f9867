"""Eigenframe, phases and propagator of a dynamical invariant.

For an invariant I(t) with a smooth nondegenerate spectrum, each eigenstate
is transported without transitions and only acquires the phase

    alpha_n(t) = int_0^t <phi_n| (i d/ds - H) |phi_n> ds,

so the propagator is ``U(t) = sum_n e^{i alpha_n} |phi_n(t)><phi_n(0)|``.

The eigenframe from a per-grid-point Hermitian diagonalization carries an
arbitrary phase at each sample, so a gauge must be fixed before alpha_n can
be integrated: at t=0 the largest-magnitude component of each eigenvector is
made real positive, and at later points each eigenvector is phase-aligned
with (and matched by overlap to) its predecessor.  The assembled
``e^{i alpha_n} |phi_n>`` is gauge-invariant, which is what the transport
checks against the Schrodinger oracle rely on.

Eigenvalue crossings (within ``crossing_tol``) make the frame ill-defined
and raise :class:`DegeneracyError` unless the caller opts out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .solve import EvolutionOperator

__all__ = ["DegeneracyError", "LRSpectrum", "lr_spectrum", "evolution_operator",
           "transport_residual"]


class DegeneracyError(ValueError):
    """Eigenvalue crossing on the grid; carries the crossing time."""

    def __init__(self, message, t):
        self.t = t
        super().__init__(f"{message} at t={t!r}")


@dataclass(frozen=True)
class LRSpectrum:
    """Continuous eigenframe of an invariant with accumulated phases.

    ``eigenvectors[k, :, n]`` is phi_n(t_k); ``phases[k, n]`` is alpha_n(t_k)
    with alpha_n(0) = 0.  ``overlaps`` holds <phi_n(0)|psi0> when an initial
    state was supplied.
    """

    times: np.ndarray
    eigenvalues: np.ndarray      # (nt, d) real
    eigenvectors: np.ndarray     # (nt, d, d) complex, columns are states
    phases: np.ndarray           # (nt, d) real
    overlaps: np.ndarray = None

    @property
    def dim(self):
        return self.eigenvalues.shape[1]

    def frame_orthonormality_defect(self):
        eye = np.eye(self.dim)
        return float(max(np.linalg.norm(v.conj().T @ v - eye)
                         for v in self.eigenvectors))

    def eigenvalue_drift(self):
        return float(np.abs(self.eigenvalues - self.eigenvalues[0]).max())


def _fix_initial_gauge(vecs):
    out = vecs.copy()
    for n in range(vecs.shape[1]):
        k = int(np.argmax(np.abs(out[:, n])))
        phase = out[k, n] / abs(out[k, n])
        out[:, n] = out[:, n] / phase
    return out


def lr_spectrum(inv, h, psi0=None, degeneracy="raise", crossing_tol=1e-8):
    """Diagonalize an invariant along its grid and integrate the phases.

    Args:
        inv: grid-sampled :class:`~fourlevel.invariants.DynamicalInvariant`.
        h: the Hamiltonian driving the phases.
        psi0: optional initial state; stores the expansion overlaps.
        degeneracy: "raise" (default) to reject eigenvalue crossings within
            ``crossing_tol``; "ignore" to proceed (the frame inside a
            degenerate subspace is then arbitrary).

    The phase integrand uses central differences for d(phi_n)/dt (one-sided
    at the endpoints) and trapezoidal quadrature on the same grid.
    """
    times, mats = inv.sample()
    nt = len(times)
    d = mats.shape[1]

    evals, evecs = np.linalg.eigh(mats)

    gaps = np.diff(np.sort(evals, axis=1), axis=1).min(axis=1)
    if degeneracy == "raise":
        bad = np.flatnonzero(gaps < crossing_tol)
        if bad.size:
            raise DegeneracyError(
                f"eigenvalue gap {gaps[bad[0]]:.3e} below {crossing_tol:g}"
                " (supply degeneracy='ignore' to proceed)", times[bad[0]])
    elif degeneracy != "ignore":
        raise ValueError("degeneracy must be 'raise' or 'ignore'")

    # continuity: match each frame to its predecessor by overlap, then align
    # the phase so <phi_prev|phi> is real positive
    evecs[0] = _fix_initial_gauge(evecs[0])
    for k in range(1, nt):
        overlap = evecs[k - 1].conj().T @ evecs[k]     # (prev n, cur m)
        order = np.empty(d, dtype=int)
        taken = np.zeros(d, dtype=bool)
        mag = np.abs(overlap)
        for n in range(d):
            m = int(np.argmax(np.where(taken, -1.0, mag[n])))
            order[n] = m
            taken[m] = True
        evecs[k] = evecs[k][:, order]
        evals[k] = evals[k][order]
        aligned = np.einsum("in,in->n", evecs[k - 1].conj(), evecs[k])
        small = np.abs(aligned) < 0.5
        if small.any() and degeneracy == "raise":
            raise DegeneracyError(
                "eigenframe changed discontinuously (crossing between grid"
                " points?)", times[k])
        evecs[k] = evecs[k] / (aligned / np.abs(aligned))

    # d(phi)/dt by central differences, one-sided at the ends
    dphi = np.empty_like(evecs)
    dphi[1:-1] = (evecs[2:] - evecs[:-2]) / (times[2:, None, None] - times[:-2, None, None])
    dphi[0] = (evecs[1] - evecs[0]) / (times[1] - times[0])
    dphi[-1] = (evecs[-1] - evecs[-2]) / (times[-1] - times[-2])

    hmats = np.stack([h.matrix(t) for t in times])
    # integrand_n = <phi_n| i d/dt |phi_n> - <phi_n|H|phi_n>
    geo = np.einsum("kin,kin->kn", evecs.conj(), 1j * dphi).real
    dyn = np.einsum("kin,kij,kjn->kn", evecs.conj(), hmats, evecs).real
    integrand = geo - dyn
    phases = np.vstack([np.zeros((1, d)),
                        cumulative_trapezoid(integrand, times, axis=0)])

    overlaps = None
    if psi0 is not None:
        psi0 = np.asarray(psi0, dtype=complex)
        overlaps = evecs[0].conj().T @ psi0

    return LRSpectrum(times, evals, evecs, phases, overlaps)


def evolution_operator(spec):
    """Assemble U(t_k) = sum_n e^{i alpha_n(t_k)} |phi_n(t_k)><phi_n(0)|."""
    if spec.eigenvectors.shape[1] != spec.eigenvectors.shape[2]:
        raise ValueError("incomplete eigenframe")
    weights = np.exp(1j * spec.phases)                     # (nt, d)
    mats = np.einsum("kn,kin,jn->kij", weights, spec.eigenvectors,
                     spec.eigenvectors[0].conj())
    return EvolutionOperator(spec.times, mats)


def evolve_state(spec, psi0):
    """States sum_n c_n e^{i alpha_n} |phi_n(t)> for an initial state."""
    psi0 = np.asarray(psi0, dtype=complex)
    c = spec.eigenvectors[0].conj().T @ psi0
    return np.einsum("n,kn,kin->ki", c, np.exp(1j * spec.phases), spec.eigenvectors)


def transport_residual(spec, oracle):
    """Worst-case || U_oracle phi_n(0) - e^{i alpha_n} phi_n(t) || on the grid.

    This is the direct check that invariant eigenstates are transported
    without transitions, with the Schrodinger oracle as ground truth.
    """
    worst = 0.0
    for n in range(spec.dim):
        target = oracle.evolve(spec.eigenvectors[0][:, n])
        built = np.exp(1j * spec.phases[:, n])[:, None] * spec.eigenvectors[:, :, n]
        worst = max(worst, float(np.linalg.norm(target - built, axis=1).max()))
    return worst
