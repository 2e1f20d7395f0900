"""Global depolarizing model and the metrics built on it.

A circuit with n_g two-qubit gates at per-gate error rate epsilon
produces rho = alpha |psi><psi| + (1 - alpha) 1/2^L with
alpha = exp(-epsilon * n_g).  All metrics below are exact in that
mixture — the maximally-mixed term is kept, not dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, ValidationError
from .exact import local_magnetization

OP_ENTROPY_DENSE_LIMIT = 10
_TIE = 1e-12


@dataclass(frozen=True)
class NoiseModel:
    epsilon: float

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValidationError(f"NoiseModel: epsilon must be >= 0, got {self.epsilon}")


def alpha(nm: NoiseModel, n_gates: int) -> float:
    if n_gates < 0:
        raise ValidationError(f"alpha: gate count must be >= 0, got {n_gates}")
    return float(np.exp(-nm.epsilon * n_gates))


@dataclass
class NoisyState:
    pure_part: np.ndarray  # statevector of the noiseless circuit output
    alpha: float
    L: int

    def __post_init__(self) -> None:
        self.pure_part = np.asarray(self.pure_part, dtype=complex)
        if self.pure_part.shape != (2 ** self.L,):
            raise ValidationError(f"NoisyState: vector length {self.pure_part.shape} "
                                  f"does not match L={self.L}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValidationError(f"NoisyState: alpha={self.alpha} outside [0, 1]")
        nrm = np.linalg.norm(self.pure_part)
        if abs(nrm - 1.0) > 1e-8:
            raise ValidationError(f"NoisyState: pure part has norm {nrm:.3e}, want 1")


def noisy_fidelity(rho: NoisyState, ref: np.ndarray) -> float:
    """<ref| rho |ref> = alpha |<ref|pure>|^2 + (1-alpha)/2^L."""
    ref = np.asarray(ref)
    if ref.shape != rho.pure_part.shape:
        raise ValidationError("noisy_fidelity: reference length mismatch")
    pure_f = abs(np.vdot(ref, rho.pure_part)) ** 2
    return float(rho.alpha * pure_f + (1.0 - rho.alpha) / 2 ** rho.L)


def infidelity_per_site(f: float, L: int) -> float:
    if not 0.0 <= f <= 1.0 + 1e-12:
        raise ValidationError(f"infidelity_per_site: fidelity {f} outside [0, 1]")
    return float(1.0 - min(f, 1.0) ** (1.0 / L))


def noisy_expectation_z(rho: NoisyState, site: int) -> float:
    """alpha * <pure|Z_site|pure>; the identity part is traceless."""
    if not 0 <= site < rho.L:
        raise ValidationError(f"noisy_expectation_z: site {site} out of range")
    return float(rho.alpha * local_magnetization(rho.pure_part)[site])


def noisy_magnetization(rho: NoisyState) -> np.ndarray:
    """All-site <Z_i> under the mixture in one pass."""
    return rho.alpha * local_magnetization(rho.pure_part)


def density_matrix(rho: NoisyState, dense_limit: int = OP_ENTROPY_DENSE_LIMIT) -> np.ndarray:
    if rho.L > dense_limit:
        raise CapabilityError(f"density_matrix: L={rho.L} exceeds dense limit {dense_limit}")
    dim = 2 ** rho.L
    out = np.outer(rho.pure_part, rho.pure_part.conj()) * rho.alpha
    out[np.diag_indices(dim)] += (1.0 - rho.alpha) / dim
    return out


def operator_entropy(rho: np.ndarray, cut: int,
                     dense_limit: int = OP_ENTROPY_DENSE_LIMIT) -> float:
    """Entropy (bits) of the operator Schmidt spectrum of rho across the
    cut [0..cut-1] | [cut..L-1]: singular values of rho reshuffled into a
    (4^{L_A} x 4^{L_B}) matrix, spectrum normalized to sum to 1."""
    rho = np.asarray(rho)
    dim = rho.shape[0]
    L = int(round(np.log2(dim)))
    if rho.shape != (dim, dim) or 2 ** L != dim:
        raise ValidationError(f"operator_entropy: shape {rho.shape} is not a 2^L square")
    if L > dense_limit:
        raise CapabilityError(f"operator_entropy: L={L} exceeds dense limit {dense_limit}")
    if not 1 <= cut < L:
        raise ValidationError(f"operator_entropy: cut {cut} out of range for L={L}")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-8:
        raise ValidationError("operator_entropy: density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise ValidationError("operator_entropy: density matrix trace != 1")
    la, lb = cut, L - cut
    # row index (a_out, a_in), column index (b_out, b_in)
    m = rho.reshape(2 ** la, 2 ** lb, 2 ** la, 2 ** lb)
    m = m.transpose(0, 2, 1, 3).reshape(4 ** la, 4 ** lb)
    s = np.linalg.svd(m, compute_uv=False)
    p = s ** 2
    tot = p.sum()
    if tot <= 0:
        raise ValidationError("operator_entropy: zero operator norm")
    p = p[p > 1e-30] / tot
    return float(-np.sum(p * np.log2(p)))


def cumulated_error(times: np.ndarray, z_series: np.ndarray, z_ref: np.ndarray,
                    t_start: float, t: float) -> float:
    """Time-averaged site-mean squared magnetization error over
    [t_start, t]: (integral of (1/L) sum_i |dz_i|^2) / (t - t_start),
    trapezoidal on the given grid."""
    times = np.asarray(times, dtype=float)
    z_series = np.atleast_2d(np.asarray(z_series, dtype=float))
    z_ref = np.atleast_2d(np.asarray(z_ref, dtype=float))
    if z_series.shape != z_ref.shape or z_series.shape[0] != times.shape[0]:
        raise ValidationError("cumulated_error: grids are not aligned")
    if t <= t_start:
        raise ValidationError(f"cumulated_error: need t > t_start, got [{t_start}, {t}]")
    mask = (times >= t_start - 1e-9) & (times <= t + 1e-9)
    if mask.sum() < 2:
        raise ValidationError("cumulated_error: fewer than two grid points in window")
    tw = times[mask]
    integrand = np.mean(np.abs(z_series[mask] - z_ref[mask]) ** 2, axis=1)
    return float(np.trapezoid(integrand, tw) / (t - t_start))


def advantage_classify(f_mps: float, f_trotter: float, f_qmpso: float) -> str:
    """Region label for one (t, epsilon) cell of the advantage diagram.
    Ties (within 1e-12) go to the classical simulation."""
    qmpso_beats = f_qmpso > f_mps + _TIE
    trotter_beats = f_trotter > f_mps + _TIE
    if qmpso_beats and trotter_beats:
        return "trotter_advantage"
    if qmpso_beats:
        return "qmpso_advantage"
    if trotter_beats:
        # circuit advantage exists even without the compressed form
        return "trotter_advantage"
    return "mps_best"
