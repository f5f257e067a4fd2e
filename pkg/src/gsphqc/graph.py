"""Geographic graphs, adjacency spectral bases, bandlimiting and sampling.

Node indices are 0-based throughout.  Eigenpairs of the adjacency matrix are
ordered by descending eigenvalue, so index 0 is the "smoothest" frequency of
an adjacency-based graph Fourier transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConstructionError, InputError

EARTH_RADIUS_KM = 6371.0
RANK_RTOL = 1e-10
MAX_SAMPLING_RETRIES = 100


@dataclass(frozen=True)
class GeoPoint:
    latitude: float
    longitude: float

    def __post_init__(self):
        lat, lon = float(self.latitude), float(self.longitude)
        if not (math.isfinite(lat) and -90.0 <= lat <= 90.0):
            raise InputError(f"latitude {self.latitude!r} outside [-90, 90]")
        if not (math.isfinite(lon) and -180.0 <= lon <= 180.0):
            raise InputError(f"longitude {self.longitude!r} outside [-180, 180]")
        object.__setattr__(self, "latitude", lat)
        object.__setattr__(self, "longitude", lon)


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in kilometres between two points."""
    phi1, phi2 = math.radians(a.latitude), math.radians(b.latitude)
    dphi = phi2 - phi1
    dlam = math.radians(b.longitude) - math.radians(a.longitude)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(min(1.0, h)))


def pairwise_haversine(points: Sequence[GeoPoint]) -> np.ndarray:
    """Dense matrix of haversine distances (km); same formula as :func:`haversine_distance`."""
    lat = np.radians([p.latitude for p in points])
    lon = np.radians([p.longitude for p in points])
    dphi = lat[None, :] - lat[:, None]
    dlam = lon[None, :] - lon[:, None]
    h = np.sin(dphi / 2) ** 2 + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlam / 2) ** 2
    d = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0)))
    # exact symmetry, independent of rounding in the two triangle halves
    d = np.triu(d, 1)
    return d + d.T


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Undirected weighted graph given by its adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise InputError(f"adjacency must be a non-empty square matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InputError("adjacency has non-finite entries")
        if np.any(A < 0):
            raise InputError("adjacency has negative weights")
        if np.any(np.diag(A) != 0):
            raise InputError("adjacency must have a zero diagonal")
        if not np.array_equal(A, A.T):
            raise InputError("adjacency must be symmetric")
        object.__setattr__(self, "adjacency", _readonly(A))

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]


def edge_weight(distance_km, theta):
    """Gaussian kernel weight exp(-d^2 / (2 theta^2))."""
    return np.exp(-np.square(distance_km) / (2.0 * theta**2))


def knn_lists(distances: np.ndarray, K: int) -> np.ndarray:
    """Indices of the K nearest other nodes for every row (ties -> lower index)."""
    N = distances.shape[0]
    d = np.array(distances, dtype=float)
    d[np.arange(N), np.arange(N)] = np.inf
    order = np.argsort(d, axis=1, kind="stable")
    return order[:, :K]


def build_knn_graph(points: Sequence[GeoPoint], K: int, theta: float) -> Graph:
    """K-nearest-neighbour graph with Gaussian-of-haversine edge weights.

    An edge is kept when either endpoint lists the other among its K nearest
    neighbours (union rule), which makes the adjacency symmetric.
    """
    N = len(points)
    if int(K) != K or K < 1:
        raise InputError(f"K must be a positive integer, got {K!r}")
    if K >= N:
        raise InputError(f"K={K} requires at least K+1={K + 1} points, got {N}")
    if not theta > 0:
        raise InputError(f"theta must be positive, got {theta!r}")
    D = pairwise_haversine(points)
    nbrs = knn_lists(D, int(K))
    mask = np.zeros((N, N), dtype=bool)
    mask[np.repeat(np.arange(N), K), nbrs.ravel()] = True
    mask |= mask.T
    A = np.where(mask, edge_weight(D, theta), 0.0)
    return Graph(A)


@dataclass(frozen=True)
class SpectralBasis:
    """Eigenbasis of an adjacency matrix plus an active frequency set.

    ``eigenvectors[:, i]`` pairs with ``eigenvalues[i]``; ``freq_set`` lists
    the column indices (ascending) that span the bandlimited subspace.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    freq_set: tuple = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        lam = _readonly(self.eigenvalues)
        U = _readonly(self.eigenvectors)
        N = lam.shape[0]
        if U.shape != (N, N):
            raise InputError(f"eigenvectors shape {U.shape} does not match {N} eigenvalues")
        fs = tuple(range(N)) if self.freq_set is None else tuple(sorted(int(i) for i in self.freq_set))
        if not fs or len(set(fs)) != len(fs) or fs[0] < 0 or fs[-1] >= N:
            raise InputError(f"invalid frequency set {self.freq_set!r} for N={N}")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", U)
        object.__setattr__(self, "freq_set", fs)
        object.__setattr__(self, "U_F", _readonly(U[:, list(fs)]))

    @property
    def node_count(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def f_count(self) -> int:
        return len(self.freq_set)

    @property
    def projector(self) -> np.ndarray:
        """Dense ``U_F U_F^T`` (cached)."""
        P = self._cache.get("projector")
        if P is None:
            P = _readonly(self.U_F @ self.U_F.T)
            self._cache["projector"] = P
        return P

    def with_freq_set(self, freq_set) -> "SpectralBasis":
        return SpectralBasis(self.eigenvalues, self.eigenvectors, tuple(freq_set))


def _fix_signs(U):
    tol = 1e-12 * max(1.0, float(np.max(np.abs(U))))
    for j in range(U.shape[1]):
        nz = np.flatnonzero(np.abs(U[:, j]) > tol)
        if nz.size and U[nz[0], j] < 0:
            U[:, j] = -U[:, j]
    return U


def spectral_decompose(g: Graph | np.ndarray) -> SpectralBasis:
    """Eigendecomposition ``A = U diag(lambda) U^T`` with a deterministic layout.

    Eigenvalues are sorted in descending order (stable, so degenerate pairs
    keep the solver's order), and each eigenvector is flipped so that its
    first non-negligible entry is positive.
    """
    A = g.adjacency if isinstance(g, Graph) else np.asarray(g, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * scale):
        raise InputError("adjacency must be symmetric for a real spectral decomposition")
    lam, U = np.linalg.eigh((A + A.T) / 2.0)
    order = np.argsort(-lam, kind="stable")
    return SpectralBasis(lam[order], _fix_signs(U[:, order].copy()))


def _check_len(basis, x, n=None, what="signal"):
    x = np.asarray(x, dtype=float)
    n = basis.node_count if n is None else n
    if x.shape != (n,):
        raise InputError(f"{what} must have shape ({n},), got {x.shape}")
    return x


def gft(basis: SpectralBasis, x) -> np.ndarray:
    """Graph Fourier transform onto the active frequency set (``U_F^T x``)."""
    return basis.U_F.T @ _check_len(basis, x)


def igft(basis: SpectralBasis, s) -> np.ndarray:
    """Inverse transform ``U_F s``."""
    return basis.U_F @ _check_len(basis, s, basis.f_count, "spectral signal")


def select_frequency_set(basis: SpectralBasis, reference, F_count: int) -> SpectralBasis:
    """Keep the ``F_count`` frequencies where ``reference`` has the most energy.

    Magnitudes are taken from the full-basis transform; equal magnitudes are
    resolved in favour of the lower index.
    """
    N = basis.node_count
    if int(F_count) != F_count or not 1 <= F_count <= N:
        raise InputError(f"F_count must be an integer in [1, {N}], got {F_count!r}")
    s = basis.eigenvectors.T @ _check_len(basis, reference, what="reference")
    order = np.lexsort((np.arange(N), -np.abs(s)))
    return basis.with_freq_set(sorted(order[: int(F_count)].tolist()))


def bandlimit_project(basis: SpectralBasis, x) -> np.ndarray:
    """Orthogonal projection onto ``span(U_F)``."""
    x = _check_len(basis, x)
    return basis.U_F @ (basis.U_F.T @ x)


@dataclass(frozen=True)
class SamplingSet:
    """Observed node indices on a graph of ``node_count`` nodes."""

    node_count: int
    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        if len(idx) != len(tuple(self.indices)):
            raise InputError("sampling indices must be unique")
        if idx and (idx[0] < 0 or idx[-1] >= self.node_count):
            raise InputError(f"sampling indices out of range for N={self.node_count}")
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.node_count)
        m[list(self.indices)] = 1.0
        return m

    def matrix(self) -> np.ndarray:
        """The diagonal 0/1 sampling matrix ``D_s``."""
        return np.diag(self.mask)

    def rank(self, basis: SpectralBasis) -> int:
        return _sampled_rank(basis.U_F[list(self.indices), :])

    def is_recoverable(self, basis: SpectralBasis) -> bool:
        return self.rank(basis) == basis.f_count


def _sampled_rank(rows):
    if rows.shape[0] == 0:
        return 0
    sv = np.linalg.svd(rows, compute_uv=False)
    return int(np.sum(sv > RANK_RTOL * sv[0])) if sv[0] > 0 else 0


def _min_singular(rows, F):
    sv = np.linalg.svd(rows, compute_uv=False)
    return sv[-1] if rows.shape[0] >= F else sv[min(rows.shape[0], F) - 1]


def build_sampling_set(basis: SpectralBasis, sample_count: int, strategy: str = "greedy_minsv",
                       seed: int = 1) -> SamplingSet:
    """Choose ``sample_count`` nodes such that ``D_s U_F`` has full column rank.

    ``random_seeded`` draws uniformly without replacement and retries with
    seed+1, seed+2, ... ; ``greedy_minsv`` adds, one at a time, the node that
    maximises the smallest singular value of the sampled rows of ``U_F``.
    """
    N, F = basis.node_count, basis.f_count
    if int(sample_count) != sample_count or sample_count > N:
        raise InputError(f"sample_count must be an integer <= N={N}, got {sample_count!r}")
    if sample_count < F:
        raise InputError(f"sample_count={sample_count} < F_count={F}: signal cannot be recovered")
    sample_count = int(sample_count)
    UF = basis.U_F
    if strategy == "random_seeded":
        for attempt in range(MAX_SAMPLING_RETRIES):
            rng = np.random.default_rng(int(seed) + attempt)
            idx = np.sort(rng.choice(N, size=sample_count, replace=False))
            if _sampled_rank(UF[idx, :]) == F:
                return SamplingSet(N, tuple(idx.tolist()))
        raise ConstructionError(
            f"no recoverable random sampling set after {MAX_SAMPLING_RETRIES} seeds starting at {seed}")
    if strategy == "greedy_minsv":
        chosen: list[int] = []
        remaining = list(range(N))
        while len(chosen) < sample_count:
            best, best_sv = None, -1.0
            for n in remaining:
                sv = _min_singular(UF[chosen + [n], :], F)
                if sv > best_sv * (1 + 1e-12) + 1e-300:
                    best, best_sv = n, sv
            chosen.append(best)
            remaining.remove(best)
        ds = SamplingSet(N, tuple(chosen))
        if not ds.is_recoverable(basis):
            raise ConstructionError("greedy sampling did not reach full rank")
        return ds
    raise InputError(f"unknown sampling strategy {strategy!r}")


def apply_sampling(ds: SamplingSet, x) -> np.ndarray:
    """``D_s x``: zero out unobserved nodes."""
    x = np.asarray(x, dtype=float)
    if x.shape != (ds.node_count,):
        raise InputError(f"signal must have shape ({ds.node_count},), got {x.shape}")
    return x * ds.mask
