"""Error-weighting kernels and the adaptive graph-signal update.

Every algorithm shares the update

    x(i+1) = x(i) + mu * U_F U_F^T diag(w(e)) e,   e = D_s (x_w(i) - x(i))

and differs only in the weights ``w``.  NLMS replaces ``U_F U_F^T`` by
``U_F (U_F^T D_s U_F)^{-1} U_F^T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, InputError
from .graph import SamplingSet, SpectralBasis

KINDS = ("LMS", "NLMS", "MCC", "GMCC", "LOG", "HQC")
_REQUIRED = {
    "LMS": (),
    "NLMS": (),
    "MCC": ("lam",),
    "GMCC": ("alpha", "lam"),
    "LOG": ("alpha",),
    "HQC": ("tau",),
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm kind and its parameters.

    ``tau`` is the HQC design parameter, ``alpha`` the LOG/GMCC shape and
    ``lam`` the MCC/GMCC kernel parameter.  ``name`` labels outputs and
    defaults to the kind.
    """

    kind: str
    mu: float
    tau: Optional[float] = None
    alpha: Optional[float] = None
    lam: Optional[float] = None
    name: Optional[str] = None

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in KINDS:
            raise ConfigError(f"unknown algorithm kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.mu is None or not math.isfinite(self.mu) or self.mu < 0:
            raise ConfigError(f"{kind}: step size mu must be a finite number >= 0, got {self.mu!r}")
        for p in _REQUIRED[kind]:
            v = getattr(self, p)
            if v is None or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{kind}: parameter {p!r} must be a positive number, got {v!r}")
        if self.name is None:
            object.__setattr__(self, "name", kind)

    def with_mu(self, mu) -> "AlgorithmSpec":
        return AlgorithmSpec(self.kind, mu, self.tau, self.alpha, self.lam, self.name)


@dataclass(frozen=True)
class FilterState:
    estimate: np.ndarray
    iteration: int = 0


def hqc_cost(e, tau) -> float:
    """Half-quadratic cost ``sum (sqrt(1 + tau e^2) - 1) / tau``."""
    if not tau > 0:
        raise InputError(f"tau must be positive, got {tau!r}")
    e = np.asarray(e, dtype=float)
    te2 = tau * np.square(e)
    # sqrt(1+x) - 1 == x / (sqrt(1+x) + 1), no cancellation for small x
    return float(np.sum(te2 / (np.sqrt(1.0 + te2) + 1.0)) / tau)


def hqc_hessian_coeff(e, tau):
    """Second derivative of the single-error HQC cost: ``(1 + tau e^2)^(-3/2)``."""
    return (1.0 + tau * np.square(e)) ** -1.5


def log_hessian_coeff(e, tau):
    """Hessian coefficient of the LOG cost, ``2 tau (1 - tau e^2) / (1 + tau e^2)^2``."""
    te2 = tau * np.square(e)
    return 2.0 * tau * (1.0 - te2) / (1.0 + te2) ** 2


def error_weights(e, spec: AlgorithmSpec) -> np.ndarray:
    """Diagonal of the error-weighting matrix for ``spec.kind``.

    GMCC uses ``exp(-lam |e|^alpha) |e|^(alpha-2)``; its value at ``e = 0`` is
    taken as 0 for ``alpha < 2`` and 1 for ``alpha == 2``.
    """
    e = np.asarray(e)
    if e.dtype != object:  # object arrays are left alone for operation counting
        e = e.astype(float, copy=False)
    kind = spec.kind
    if kind in ("LMS", "NLMS"):
        return np.ones_like(e)
    e2 = np.square(e)
    if kind == "HQC":
        return 1.0 / np.sqrt(1.0 + spec.tau * e2)
    if kind == "LOG":
        return 1.0 / (1.0 + spec.alpha * e2)
    if kind == "MCC":
        return np.exp(-spec.lam * e2)
    # GMCC
    a = spec.alpha
    ae = np.abs(e)
    out = np.zeros_like(e)
    nz = ae > 0
    out[nz] = np.exp(-spec.lam * ae[nz] ** a) * ae[nz] ** (a - 2.0)
    if a == 2.0:
        out[~nz] = 1.0
    return out


class Updater:
    """Precomputed geometry for repeated updates on one (basis, sampling set)."""

    def __init__(self, basis: SpectralBasis, ds: SamplingSet, spec: AlgorithmSpec):
        if ds.node_count != basis.node_count:
            raise InputError("sampling set and basis disagree on the node count")
        self.basis, self.ds, self.spec = basis, ds, spec
        self.mask = ds.mask
        self.U_F = np.asarray(basis.U_F)
        self.gain = nlms_gain(basis, ds) if spec.kind == "NLMS" else None

    def error(self, estimate, observed):
        return self.mask * (observed - estimate)

    def direction(self, e):
        """Update direction before scaling by mu, plus the weights used."""
        w = error_weights(e, self.spec)
        s = self.U_F.T @ (w * e)
        if self.gain is not None:
            s = self.gain @ s
        return self.U_F @ s, w

    def step(self, estimate, observed, mu=None):
        e = self.error(estimate, observed)
        d, w = self.direction(e)
        return estimate + (self.spec.mu if mu is None else mu) * d, e, w


def nlms_gain(basis: SpectralBasis, ds: SamplingSet) -> np.ndarray:
    """``(U_F^T D_s U_F)^{-1}``, via SVD; cached on the basis per sampling set."""
    key = ("nlms", ds.indices)
    cached = basis._cache.get(key)
    if cached is not None:
        return cached
    UF = basis.U_F
    M = UF.T @ (ds.mask[:, None] * UF)
    M = (M + M.T) / 2.0
    u, sv, vt = np.linalg.svd(M)
    if sv[-1] <= 1e-10 * sv[0]:
        raise np.linalg.LinAlgError(
            "U_F^T D_s U_F is singular: sampling set does not recover the frequency set")
    inv = (vt.T / sv) @ u.T
    inv.setflags(write=False)
    basis._cache[key] = inv
    return inv


def filter_step(state: FilterState, observed, ds: SamplingSet, basis: SpectralBasis,
                spec: AlgorithmSpec) -> FilterState:
    """One adaptive update; ``observed`` is the full noisy signal, masked here."""
    observed = np.asarray(observed, dtype=float)
    if observed.shape != (basis.node_count,):
        raise InputError(f"observed must have shape ({basis.node_count},), got {observed.shape}")
    new, _, _ = Updater(basis, ds, spec).step(np.asarray(state.estimate, dtype=float), observed)
    return FilterState(new, state.iteration + 1)


@dataclass(frozen=True)
class ChangeSchedule:
    """Multiply the true signal by ``factor`` from ``iteration`` onward."""

    iteration: int
    factor: float

    def truth_at(self, truth, i):
        return truth * self.factor if i >= self.iteration else truth


@dataclass(frozen=True)
class StepSwitch:
    """From ``start`` onward use ``mu(i) = multiple / lambda_max(U_F^T G(e(i)) D_s U_F)``."""

    start: int
    multiple: float


@dataclass
class FilterRun:
    msd: np.ndarray  # linear ||x_hat(i+1) - x_true(i)||^2
    estimates: Optional[np.ndarray] = None
    mu_trace: Optional[np.ndarray] = None
    final_weights: Optional[np.ndarray] = field(default=None, repr=False)


def run_filter(x_true, noise, ds: SamplingSet, basis: SpectralBasis, spec: AlgorithmSpec,
               iterations: int, seed: int, change_schedule: ChangeSchedule | None = None,
               step_switch: StepSwitch | None = None, x0=None, keep_estimates: bool = True) -> FilterRun:
    """Run one trial.

    The noise block ``w`` of shape ``(iterations, N)`` is drawn up front from
    ``default_rng(seed)``, so every algorithm run with the same seed sees the
    same noise realisation.  Entry ``i`` of the MSD trace compares the
    estimate after update ``i`` with the truth in force at iteration ``i``.
    """
    from .analysis import critical_step  # analysis does not import this module

    if int(iterations) != iterations or iterations < 1:
        raise InputError(f"iterations must be a positive integer, got {iterations!r}")
    x_true = np.asarray(x_true, dtype=float)
    N = basis.node_count
    if x_true.shape != (N,):
        raise InputError(f"x_true must have shape ({N},), got {x_true.shape}")
    upd = Updater(basis, ds, spec)
    rng = np.random.default_rng(int(seed))
    w_block = noise.sample((int(iterations), N), rng)
    x = np.zeros(N) if x0 is None else np.array(x0, dtype=float)
    msd = np.empty(iterations)
    est = np.empty((iterations, N)) if keep_estimates else None
    mus = np.full(iterations, spec.mu) if step_switch is not None else None
    w = None
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(iterations):
            truth = change_schedule.truth_at(x_true, i) if change_schedule else x_true
            e = upd.error(x, truth + w_block[i])
            d, w = upd.direction(e)
            mu = spec.mu
            if step_switch is not None and i >= step_switch.start:
                mu = 0.0 if step_switch.multiple == 0 else step_switch.multiple * critical_step(basis, ds, w)
                mus[i] = mu
            x = x + mu * d
            r = x - truth
            msd[i] = r @ r
            if est is not None:
                est[i] = x
    return FilterRun(msd, est, mus, w)
