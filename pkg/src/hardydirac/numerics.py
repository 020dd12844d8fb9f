"""Shared numerical substrate.

Radial grids, quadrature on (0, infinity) that is robust to inverse-power
endpoint singularities and exponential tails, supremum search over r > 0,
and symmetric/Hermitian banded linear algebra (solve, generalized
eigenvalues by inertia bisection).

All integrals over (0, infinity) are computed after the substitution
r = e^t, which turns 1/r singularities at the origin and decaying tails
into smooth integrands on the line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import LinAlgError, cholesky_banded, cho_solve_banded, solve_banded

__all__ = [
    "RadialGrid",
    "Quadrant",
    "SupResult",
    "QuadratureError",
    "UnboundedError",
    "NotPositiveDefiniteError",
    "integrate_radial",
    "sup_over_r",
    "BandedHermitianMatrix",
    "solve_banded_hermitian",
    "eig_banded_hermitian",
]

# Contributions from r outside [1e-60, 1e60] are below every tolerance used
# here for weights with power-law-or-faster decay, so the log-space window is
# clipped there.  Without the clip QUADPACK wanders into overflow territory.
_T_LO = math.log(1e-60)
_T_HI = math.log(1e60)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge.

    Carries the partial result in ``value`` and the estimated absolute
    error in ``estimate``.
    """

    def __init__(self, message: str, value: float, estimate: float):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class UnboundedError(ValueError):
    """Supremum search detected unbounded growth."""


class NotPositiveDefiniteError(ValueError):
    """Banded Cholesky factorization broke down."""


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing positive radial nodes with a transform label."""

    nodes: np.ndarray
    transform: str = "log-uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("grid needs at least two nodes")
        if nodes[0] <= 0.0 or np.any(np.diff(nodes) <= 0.0):
            raise ValueError("grid nodes must be strictly increasing and positive")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def log_uniform(cls, n: int, r_min: float = 1e-6, r_max: float = 50.0) -> "RadialGrid":
        if not (0.0 < r_min < r_max):
            raise ValueError("need 0 < r_min < r_max")
        return cls(np.exp(np.linspace(math.log(r_min), math.log(r_max), n)), "log-uniform")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def t(self) -> np.ndarray:
        """Log-space coordinates of the nodes."""
        return np.log(self.nodes)

    def refined(self) -> "RadialGrid":
        """Grid with at least twice the nodes, r_min halved and r_max doubled."""
        return RadialGrid.log_uniform(2 * self.n, self.r_min / 2.0, self.r_max * 2.0)


@dataclass(frozen=True)
class Quadrant:
    """A quadrature result: value plus an absolute error estimate."""

    value: float
    abs_error_estimate: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("quadrature value must be finite")
        if self.abs_error_estimate < 0.0:
            raise ValueError("error estimate must be nonnegative")


@dataclass(frozen=True)
class SupResult:
    """Result of a supremum search over r > 0.

    ``argmax`` is the maximizing radius; ``tag`` is set to ``"r->0"`` or
    ``"r->inf"`` when the supremum is only approached at an endpoint.
    """

    value: float
    argmax: float
    tag: str | None = None


def integrate_radial(f, a: float = 0.0, b: float = math.inf,
                     singularity_hint: str = "none",
                     rel_tol: float = 1e-10,
                     breakpoints=()) -> Quadrant:
    """Integrate ``f(r) dr`` over (a, b) with 0 <= a < b <= inf.

    ``singularity_hint`` is one of ``none``, ``inverse_r_at_0``,
    ``decay_at_inf``; the log substitution neutralizes both hinted
    behaviours, so the hint only documents intent.  ``breakpoints`` are
    radii where the integrand is known to be non-smooth (shell edges,
    table ends); the integral is split there so the adaptive rule cannot
    step over a narrow feature.
    """
    if singularity_hint not in ("none", "inverse_r_at_0", "decay_at_inf"):
        raise ValueError(f"unknown singularity hint {singularity_hint!r}")
    if not (0.0 <= a < b):
        raise ValueError("need 0 <= a < b")

    t_lo = _T_LO if a == 0.0 else max(math.log(a), _T_LO)
    t_hi = _T_HI if math.isinf(b) else min(math.log(b), _T_HI)
    if t_lo >= t_hi:
        return Quadrant(0.0, 0.0)

    cuts = {t_lo, t_hi}
    if t_lo < 0.0 < t_hi:
        cuts.add(0.0)
    for rb in breakpoints:
        if rb > 0.0:
            tb = math.log(rb)
            if t_lo < tb < t_hi:
                cuts.add(tb)
    edges = sorted(cuts)

    def g(t: float) -> float:
        r = math.exp(t)
        val = f(r) * r
        if not math.isfinite(val):
            raise ValueError(f"integrand returned a non-finite value at r={r:g}")
        return val

    total = 0.0
    err = 0.0
    troubled = False
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, *rest = quad(g, lo, hi, epsabs=1e-300, epsrel=rel_tol,
                           limit=300, full_output=True)
        total += v
        err += e
        if len(rest) == 2:  # (infodict, message) present on trouble
            troubled = True
    # a flagged run whose estimate is still tiny relative to the value has
    # converged for every purpose here (merely kinked, not divergent)
    if troubled and err > max(1e4 * rel_tol * abs(total), 1e-13):
        raise QuadratureError(
            f"quadrature did not converge (value={total:.6g}, est={err:.3g})",
            total, err)
    return Quadrant(total, err)


def _golden_max(g, t_lo: float, t_hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Golden-section maximization of g(e^t) for t in [t_lo, t_hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = t_lo, t_hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = g(math.exp(c))
    fd = g(math.exp(d))
    for _ in range(max_iter):
        if b - a < tol * max(1.0, abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(math.exp(d))
    if fc >= fd:
        return math.exp(c), fc
    return math.exp(d), fd


def sup_over_r(g, r_lo: float = 1e-6, r_hi: float = 1e6,
               scan_points: int = 433, candidates=(),
               rel_tol: float = 1e-8) -> SupResult:
    """Supremum of ``g`` over r > 0.

    A coarse log-uniform scan over [r_lo, r_hi] brackets the maximum,
    golden-section refinement polishes it, and both endpoints are probed
    over many further decades: monotone growth that does not level off
    raises :class:`UnboundedError`, growth that saturates is reported
    with a limit tag.  ``candidates`` are radii that must be probed
    exactly (jump points of the integrand).
    """
    rs = np.exp(np.linspace(math.log(r_lo), math.log(r_hi), scan_points))
    vals = np.empty_like(rs)
    for i, r in enumerate(rs):
        vals[i] = _checked_eval(g, r)

    i_best = int(np.argmax(vals))
    best = float(vals[i_best])
    arg = float(rs[i_best])

    for r in candidates:
        if r <= 0.0:
            continue
        v = _checked_eval(g, r)
        if v > best:
            best, arg = v, float(r)

    # refine around the best scanned bracket when it is interior and strict
    if 0 < i_best < scan_points - 1 and vals[i_best] > max(vals[i_best - 1], vals[i_best + 1]):
        r_ref, v_ref = _golden_max(g, math.log(rs[i_best - 1]), math.log(rs[i_best + 1]))
        if v_ref > best:
            best, arg = v_ref, r_ref

    # when the scan maximum sits on an edge, probe 24 further decades:
    # saturating growth yields a limit tag, persistent growth is unbounded
    tag = None
    for edge, direction, label in ((0, -1.0, "r->0"), (scan_points - 1, 1.0, "r->inf")):
        if i_best != edge:
            continue
        v_prev = vals[edge]
        r = rs[edge]
        grew = False
        still_growing = True
        for _ in range(24):
            r = r * (10.0 ** direction)
            v = _checked_eval(g, r)
            if v > v_prev * (1.0 + rel_tol) or (v_prev <= 0.0 and v > 0.0):
                grew = True
                v_prev = v
                if v > best:
                    best, arg = v, r
            else:
                still_growing = False
                break
        if grew and still_growing:
            raise UnboundedError(f"supremum grows without bound toward {label}")
        if grew:
            tag = label
    return SupResult(best, arg, tag)


def _checked_eval(g, r: float) -> float:
    v = g(r)
    if math.isnan(v):
        raise ValueError(f"sup integrand returned NaN at r={r:g}")
    if math.isinf(v):
        raise UnboundedError(f"sup integrand is infinite at r={r:g}")
    return float(v)


# ---------------------------------------------------------------------------
# banded Hermitian linear algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BandedHermitianMatrix:
    """Hermitian banded matrix in lower-banded storage.

    ``ab[d, j] = A[j + d, j]`` for diagonals d = 0..bandwidth; the strictly
    upper part is implied by (conjugate) symmetry.
    """

    ab: np.ndarray

    def __post_init__(self):
        ab = np.atleast_2d(np.asarray(self.ab))
        object.__setattr__(self, "ab", ab)

    @property
    def n(self) -> int:
        return self.ab.shape[1]

    @property
    def bandwidth(self) -> int:
        return self.ab.shape[0] - 1

    @classmethod
    def from_dense(cls, a: np.ndarray, bandwidth: int | None = None) -> "BandedHermitianMatrix":
        a = np.asarray(a)
        n = a.shape[0]
        if bandwidth is None:
            bandwidth = 0
            for d in range(1, n):
                if np.any(np.diag(a, -d) != 0):
                    bandwidth = d
        ab = np.zeros((bandwidth + 1, n), dtype=a.dtype)
        for d in range(bandwidth + 1):
            ab[d, : n - d] = np.diag(a, -d)
        return cls(ab)

    def to_dense(self) -> np.ndarray:
        n, bw = self.n, self.bandwidth
        a = np.zeros((n, n), dtype=self.ab.dtype)
        for d in range(bw + 1):
            idx = np.arange(n - d)
            a[idx + d, idx] = self.ab[d, idx]
            if d:
                a[idx, idx + d] = np.conj(self.ab[d, idx])
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x)
        y = np.zeros(self.n, dtype=np.result_type(self.ab.dtype, x.dtype))
        for d in range(self.bandwidth + 1):
            diag = self.ab[d, : self.n - d]
            y[d:] += diag * x[: self.n - d]
            if d:
                y[: self.n - d] += np.conj(diag) * x[d:]
        return y

    def shifted(self, sigma: float, other: "BandedHermitianMatrix") -> "BandedHermitianMatrix":
        """self - sigma*other, with other padded/truncated to this bandwidth."""
        bw = max(self.bandwidth, other.bandwidth)
        ab = np.zeros((bw + 1, self.n), dtype=np.result_type(self.ab.dtype, other.ab.dtype))
        ab[: self.bandwidth + 1] = self.ab
        ab[: other.bandwidth + 1] -= sigma * other.ab
        return BandedHermitianMatrix(ab)


def solve_banded_hermitian(matrix: BandedHermitianMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = b for Hermitian positive definite banded A.

    One step of iterative refinement keeps the residual near machine level
    even on badly scaled grids.
    """
    b = np.asarray(rhs)
    try:
        c = cholesky_banded(matrix.ab, lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError(
            "banded Cholesky factorization failed; matrix is not positive definite"
        ) from exc
    x = cho_solve_banded((c, True), b)
    r = b - matrix.matvec(x)
    nb = np.linalg.norm(b)
    if nb > 0 and np.linalg.norm(r) > 1e-14 * nb:
        x = x + cho_solve_banded((c, True), r)
    return x


def _scaled_copy(ab: np.ndarray) -> np.ndarray:
    """Symmetric diagonal equilibration of a lower-banded matrix."""
    d = np.abs(ab[0]).copy()
    d[d < 1e-300] = 1.0
    s = 1.0 / np.sqrt(d)
    out = np.array(ab, dtype=float, copy=True)
    n = ab.shape[1]
    for i in range(ab.shape[0]):
        j = np.arange(n - i)
        out[i, j] *= s[j] * s[j + i]
    return out


def ldl_inertia(ab: np.ndarray) -> int:
    """Number of negative pivots of a symmetric banded matrix.

    Unpivoted LDL^T; callers should equilibrate first (``_scaled_copy``) so
    that element growth stays harmless.  Zero pivots are nudged negative,
    which at worst moves a bisection probe by one ULP.
    """
    bw = ab.shape[0] - 1
    n = ab.shape[1]
    L = np.zeros((bw + 1, n))
    d = np.zeros(n)
    for j in range(n):
        k0 = max(0, j - bw)
        if j > k0:
            ks = np.arange(k0, j)
            s = ab[0, j] - np.sum(L[j - ks, ks] ** 2 * d[ks])
        else:
            s = ab[0, j]
        if s == 0.0:
            s = -1e-300
        d[j] = s
        top = min(bw, n - 1 - j)
        for i in range(1, top + 1):
            r = j + i
            v = ab[i, j]
            for k in range(max(0, r - bw), j):
                v -= L[r - k, k] * L[j - k, k] * d[k]
            L[i, j] = v / d[j]
    return int(np.sum(d < 0.0))


def _banded_to_general(ab: np.ndarray) -> np.ndarray:
    """Lower-banded symmetric storage to the (2*bw+1)-diagonal form of solve_banded."""
    bw = ab.shape[0] - 1
    n = ab.shape[1]
    gen = np.zeros((2 * bw + 1, n), dtype=ab.dtype)
    for d in range(bw + 1):
        gen[bw + d, : n - d] = ab[d, : n - d]      # subdiagonal d
        if d:
            gen[bw - d, d:] = ab[d, : n - d]        # superdiagonal d (symmetric)
    return gen


def _inverse_iteration(A: BandedHermitianMatrix, B: BandedHermitianMatrix,
                       sigma: float, iters: int = 4) -> np.ndarray:
    shifted = A.shifted(sigma, B)
    gen = _banded_to_general(shifted.ab)
    bw = shifted.bandwidth
    n = A.n
    v = np.ones(n) / math.sqrt(n)
    v += 1e-3 * np.cos(np.arange(n))
    for _ in range(iters):
        try:
            v = solve_banded((bw, bw), gen, v)
        except LinAlgError:
            # probe sits exactly on the eigenvalue; nudge and refactor
            shifted = A.shifted(sigma * (1.0 + 1e-12) + 1e-300, B)
            gen = _banded_to_general(shifted.ab)
            v = solve_banded((bw, bw), gen, v)
        nrm = math.sqrt(abs(np.dot(v, B.matvec(v))))
        if nrm == 0.0:
            raise LinAlgError("inverse iteration collapsed")
        v = v / nrm
    return v


def eig_banded_hermitian(A: BandedHermitianMatrix, B: BandedHermitianMatrix,
                         window: tuple[float, float], count: int | None = None,
                         tol: float = 1e-12, residual_tol: float = 1e-8):
    """Eigenpairs of the pencil A v = E B v inside ``window``.

    A is Hermitian banded, B Hermitian positive definite banded.  Eigenvalues
    are located by inertia bisection on the equilibrated shifted matrix
    (robust, deterministic, no spurious modes); eigenvectors follow from
    shifted inverse iteration.  Returns [(E, v), ...] sorted ascending.
    """
    lo, hi = window
    if not lo < hi:
        raise ValueError("window must satisfy E_lo < E_hi")
    try:
        cholesky_banded(np.asarray(B.ab, dtype=float), lower=True)
    except LinAlgError as exc:
        raise NotPositiveDefiniteError("pencil matrix B is not positive definite") from exc

    def inertia_at(E: float) -> int:
        return ldl_inertia(_scaled_copy(A.shifted(E, B).ab))

    c_lo = inertia_at(lo)
    c_hi = inertia_at(hi)
    n_found = c_hi - c_lo
    if count is not None:
        n_found = min(n_found, count)

    pairs = []
    for idx in range(c_lo, c_lo + n_found):
        a, b = lo, hi
        while b - a > tol * max(1.0, abs(a), abs(b)):
            mid = 0.5 * (a + b)
            if inertia_at(mid) > idx:
                b = mid
            else:
                a = mid
        E = 0.5 * (a + b)
        v = _inverse_iteration(A, B, E + 10.0 * tol * max(1.0, abs(E)))
        # Rayleigh polish
        num = float(np.dot(v, A.matvec(v)))
        den = float(np.dot(v, B.matvec(v)))
        if den > 0 and lo <= num / den <= hi and abs(num / den - E) < 1e3 * tol * max(1.0, abs(E)):
            E = num / den
        res = np.linalg.norm(A.matvec(v) - E * B.matvec(v))
        vnorm = math.sqrt(abs(np.dot(v, B.matvec(v))))
        if res > residual_tol * max(vnorm, 1e-300) * max(1.0, np.abs(A.ab).max()):
            warnings.warn(f"eigenpair at E={E:.6g} has residual {res:.2e}")
        pairs.append((float(E), v))
    return pairs
