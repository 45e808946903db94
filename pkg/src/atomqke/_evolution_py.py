"""Pure-numpy stepped propagators: reference implementation and fallback.

Both functions integrate a piecewise-constant Hamiltonian with one exact
matrix exponential per step.

``evolve_stepped_dense`` works on an arbitrary Hermitian drive plus
diagonal interaction via per-step eigendecomposition; it is the slow,
assumption-free reference.

``evolve_stepped_blocked`` exploits the structure every pulse here has: a
drive addressing two levels of a single atom plus a diagonal interaction.
The step Hamiltonian is then block-diagonal over the spectator
configuration, each block a 2x2 whose exponential has a closed form.  The
results agree with the dense path to rounding.  The compiled twin in
``_evolution.pyx`` implements the same contract.
"""

from __future__ import annotations

import numpy as np


def evolve_stepped_dense(
    drive: np.ndarray,
    interaction_dt: np.ndarray,
    areas: np.ndarray,
    rhs: np.ndarray,
) -> np.ndarray:
    """Apply prod_k exp(-i (areas[k] * drive + diag(interaction_dt))) to rhs.

    drive: Hermitian (n, n) structure matrix (dimensionless).
    interaction_dt: per-basis-state interaction phase per step [rad].
    areas: per-step drive areas [rad], earliest first.
    rhs: (n,) state or (n, m) stack of states.
    """
    drive = np.asarray(drive, dtype=np.complex128)
    interaction_dt = np.asarray(interaction_dt, dtype=float)
    areas = np.asarray(areas, dtype=float)
    vector = rhs.ndim == 1
    out = np.array(rhs, dtype=np.complex128, copy=True)
    if vector:
        out = out[:, None]
    diag = np.diag_indices(drive.shape[0])
    for a in areas:
        step = a * drive
        step[diag] += interaction_dt
        vals, vecs = np.linalg.eigh(step)
        out = vecs @ (np.exp(-1j * vals)[:, None] * (vecs.conj().T @ out))
    return out[:, 0] if vector else out


def evolve_stepped_blocked(
    w_lo: np.ndarray,
    w_hi: np.ndarray,
    w_spectator: np.ndarray,
    areas: np.ndarray,
    phase: float,
    rhs: np.ndarray,
) -> np.ndarray:
    """Stepped evolution of a two-level drive on one atom of a 3-level chain.

    Layout: rhs has shape (B, 3, M) where B indexes the joint configuration
    of all undriven atoms and the middle axis is the driven atom's level
    (0 = driven low, 1 = spectator level, 2 = driven high).

    Per config b and step k the (0, 2) block evolves under
        [[w_lo[b], (a_k/2) e^{i phase}], [(a_k/2) e^{-i phase}, w_hi[b]]]
    while the spectator level only accrues the diagonal phase
    w_spectator[b] per step.  All w arrays are phases per step [rad].
    """
    w_lo = np.asarray(w_lo, dtype=float)
    w_hi = np.asarray(w_hi, dtype=float)
    w_spectator = np.asarray(w_spectator, dtype=float)
    areas = np.asarray(areas, dtype=float)
    out = np.array(rhs, dtype=np.complex128, copy=True)

    mu = 0.5 * (w_lo + w_hi)
    delta = 0.5 * (w_lo - w_hi)
    pre = np.exp(-1j * mu)[:, None]
    off_lo = -1j * np.exp(1j * phase)
    off_hi = -1j * np.exp(-1j * phase)
    for a in areas:
        kappa = 0.5 * a
        rho = np.hypot(delta, kappa)
        sinc = np.where(rho > 0.0, np.sin(rho) / np.where(rho > 0.0, rho, 1.0), 1.0)
        c = np.cos(rho)
        u00 = (pre * (c - 1j * sinc * delta)[:, None])
        u11 = (pre * (c + 1j * sinc * delta)[:, None])
        u01 = pre * (off_lo * sinc * kappa)[:, None]
        u10 = pre * (off_hi * sinc * kappa)[:, None]
        lo = out[:, 0, :].copy()  # not a view: both rows read both inputs
        hi = out[:, 2, :].copy()
        out[:, 0, :] = u00 * lo + u01 * hi
        out[:, 2, :] = u10 * lo + u11 * hi
    out[:, 1, :] *= np.exp(-1j * w_spectator * len(areas))[:, None]
    return out
