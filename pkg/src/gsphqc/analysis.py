"""Stability bounds and closed-form steady-state MSD for the HQC update.

Everything here works in the spectral domain on the F x F operator

    M = U_F^T G D_s U_F

where ``G`` is the diagonal error-weighting matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOperatorError, InputError, InstabilityError
from .graph import SamplingSet, SpectralBasis
from .metrics import linear_to_db
from .noise import BernoulliGaussian, Gaussian, mixture_abs_moment, theta_moment

VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class WeightedOperator:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0])


def weighted_operator(basis: SpectralBasis, ds: SamplingSet, weights=None) -> WeightedOperator:
    """``U_F^T diag(weights) D_s U_F``, symmetrised, with its eigendecomposition.

    ``weights=None`` means unit weights (the LMS / converged-HQC operator).
    """
    N = basis.node_count
    w = np.ones(N) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (N,) or ds.node_count != N:
        raise InputError("weights, sampling set and basis must share the node count")
    UF = basis.U_F
    M = UF.T @ ((w * ds.mask)[:, None] * UF)
    M = (M + M.T) / 2.0
    lam, V = np.linalg.eigh(M)
    return WeightedOperator(M, lam[::-1].copy(), V[:, ::-1].copy())


def mean_step_bound(op: WeightedOperator) -> float:
    """Largest step keeping the mean error recursion stable: ``2 / lambda_max``."""
    if not op.lambda_max > 0:
        raise DegenerateOperatorError(
            f"lambda_max = {op.lambda_max:g}: the signal is not excited on the sampled set")
    return 2.0 / op.lambda_max


def mean_square_step_bound(op: WeightedOperator) -> float:
    """Critical step for mean-square stability: ``1 / lambda_max``."""
    return mean_step_bound(op) / 2.0


def critical_step(basis, ds, weights) -> float:
    return mean_square_step_bound(weighted_operator(basis, ds, weights))


def mode_convergence_factors(op: WeightedOperator, mu: float, c: float = 1.0) -> np.ndarray:
    """Per-mode linear factors ``|1 - c mu lambda_i|`` (same order as ``op.eigenvalues``)."""
    return np.abs(1.0 - c * mu * op.eigenvalues)


def non_contracting_modes(factors) -> np.ndarray:
    return np.asarray(factors) >= 1.0


def _as_mixture(noise) -> BernoulliGaussian:
    if isinstance(noise, BernoulliGaussian):
        return noise
    if isinstance(noise, Gaussian):
        return BernoulliGaussian(0.0, noise.var, 0.0)
    raise InputError(f"steady-state theory needs Gaussian or Bernoulli-Gaussian noise, got {type(noise).__name__}")


def steady_state_weight_factor(tau: float, noise) -> float:
    """Second-order expansion of the mean HQC weight at steady state.

    ``1 - tau/2 Pr var_gamma theta(2) - tau/2 (1 - Pr) var_eta theta(2)``.
    Not clamped: a negative value means the expansion is meaningless, see
    :func:`taylor_validity_warning`.
    """
    p = _as_mixture(noise)
    th2 = theta_moment(2)
    return 1.0 - 0.5 * tau * p.pr * p.var_gamma * th2 - 0.5 * tau * (1.0 - p.pr) * p.var_eta * th2


def taylor_validity_warning(tau: float, noise, threshold: float = VALIDITY_THRESHOLD) -> bool:
    """True when ``tau * E[w^2]`` exceeds ``threshold`` (expansion not trustworthy)."""
    return tau * mixture_abs_moment(_as_mixture(noise), 2) > threshold


@dataclass(frozen=True)
class SteadyStateInputs:
    mu: float
    tau: float
    noise: object
    basis: SpectralBasis
    ds: SamplingSet


@dataclass(frozen=True)
class MsdPrediction:
    msd_linear: float
    msd_db: float
    validity_warning: bool
    weight_factor: float = 1.0


def kron_recursion(op: WeightedOperator, mu: float) -> np.ndarray:
    """Exact second-moment recursion matrix ``(I - mu M)^T kron (I - mu M)``."""
    A = np.eye(op.matrix.shape[0]) - mu * op.matrix
    return np.kron(A.T, A)


def spectral_radius(R) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(R))))


def kronecker_neglect_gap(op: WeightedOperator, mu: float) -> dict:
    """Compare the exact recursion with the first-order form ``I - 2 (I kron mu M)``.

    The two spectral radii differ by ``(mu lambda)^2`` for the dominant mode.
    """
    F = op.matrix.shape[0]
    exact = spectral_radius(kron_recursion(op, mu))
    approx = spectral_radius(np.eye(F * F) - 2.0 * np.kron(np.eye(F), mu * op.matrix))
    return {"exact_radius": exact, "approx_radius": approx, "gap": abs(exact - approx)}


def steady_state_msd(inputs: SteadyStateInputs) -> MsdPrediction:
    """Closed-form steady-state MSD ``mu^2 vec(H)^T (I - R)^{-1} vec(I)``.

    The steady-state weighting matrix is ``f D_s`` with ``f`` from
    :func:`steady_state_weight_factor`.  ``H`` follows the two-term form
    ``(var_eta + Pr var_gamma) U_F^T G D_s G U_F``; note the Gaussian term is
    not scaled by ``1 - Pr`` there, unlike the moment expression it derives
    from.
    """
    mu, tau = float(inputs.mu), float(inputs.tau)
    p = _as_mixture(inputs.noise)
    basis, ds = inputs.basis, inputs.ds
    f = steady_state_weight_factor(tau, p)
    warn = taylor_validity_warning(tau, p)
    G = f * ds.mask
    op = weighted_operator(basis, ds, G)
    UF = basis.U_F
    H = (p.var_eta + p.pr * p.var_gamma) * (UF.T @ ((G * ds.mask * G)[:, None] * UF))
    R = kron_recursion(op, mu)
    rho = spectral_radius(R)
    if not rho < 1.0:
        try:
            bound = f"; mean-square step bound is {mean_square_step_bound(op):.6g}"
        except DegenerateOperatorError:
            bound = f"; steady-state weight factor {f:.6g} leaves no positive mode"
        raise InstabilityError(
            f"second-moment recursion has spectral radius {rho:.6g} >= 1 at mu={mu:g}{bound}"
            + (" (Taylor expansion invalid for this noise)" if warn else ""))
    F = op.matrix.shape[0]
    vecI = np.eye(F).ravel(order="F")
    k = np.linalg.solve(np.eye(F * F) - R.T, vecI)
    msd = float(mu * mu * H.ravel(order="F") @ k)
    msd = max(msd, 0.0)
    return MsdPrediction(msd, linear_to_db(msd), warn, f)
