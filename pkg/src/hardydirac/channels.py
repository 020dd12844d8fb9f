"""Spin-orbit channel algebra for two-spinor fields.

A field is a finite sum of channel terms f_k(r) Omega_k, where Omega_k is a
unit-normalized angular spinor with spin-orbit eigenvalue k (k integer,
k != -1).  On such a term the operator sigma.grad acts radially as

    f  ->  f'(r) - k f(r) / r

carried on the partner angular spinor (sigma.x_hat) Omega_k, whose
spin-orbit eigenvalue is -k-2.  Explicit angular spinors are implemented
for k in {0, -2} only, which is enough to validate the radial reduction
against a 3D finite-difference lattice; every other channel is exercised
purely radially.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RadialGrid, integrate_radial
from .potentials import PotentialComponent, PotentialPair, combine

__all__ = [
    "Channel",
    "ProfileTerm",
    "ClosedFormProfile",
    "GridProfile",
    "SpinorField",
    "exp_profile",
    "gauss_profile",
    "radial_sigma_grad",
    "channel_weights",
    "field_norm_weighted",
    "sigma_grad_norm_weighted",
    "evaluate_spinor",
    "lattice_sigma_grad_norm",
    "lattice_weighted_norm",
    "parse_profile",
    "parse_field_term",
    "build_field",
    "log_derivative",
]


@dataclass(frozen=True)
class Channel:
    """A spin-orbit channel: eigenvalue k, never -1."""

    k: int

    def __post_init__(self):
        if self.k == -1:
            raise ValueError("k = -1 is not in the spin-orbit spectrum")

    @property
    def kappa(self) -> int:
        return self.k + 1

    @property
    def l(self) -> int:
        """Orbital index of the channel's angular spinor."""
        return self.k if self.k >= 0 else -self.k - 1


@dataclass(frozen=True)
class ProfileTerm:
    """One closed-form term coef * r**p * exp(-a r) or exp(-a r^2)."""

    coef: complex
    p: float
    a: float
    kind: str  # "exp" or "gauss"

    def __post_init__(self):
        if self.kind not in ("exp", "gauss"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.a <= 0:
            raise ValueError("decay rate must be positive")
        if 2.0 * self.p + 2.0 <= -1.0:
            raise ValueError(f"r^{self.p} is not square integrable with weight r^2")


@dataclass(frozen=True)
class ClosedFormProfile:
    """Finite sum of monomial-exponential terms; closed under d/dr and f - k f/r."""

    terms: tuple

    def __call__(self, r):
        if np.isscalar(r):
            rr = float(r)
            lr = math.log(rr)
            out = 0.0 + 0.0j
            for t in self.terms:
                decay = rr if t.kind == "exp" else rr * rr
                out += t.coef * math.exp(t.p * lr - t.a * decay)
            return out
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        lr = np.log(r)
        for t in self.terms:
            decay = r if t.kind == "exp" else r * r
            out += t.coef * np.exp(t.p * lr - t.a * decay)
        return out

    def derivative(self) -> "ClosedFormProfile":
        new = []
        for t in self.terms:
            if t.p != 0.0:
                new.append(ProfileTerm(t.coef * t.p, t.p - 1.0, t.a, t.kind))
            if t.kind == "exp":
                new.append(ProfileTerm(-t.coef * t.a, t.p, t.a, t.kind))
            else:
                new.append(ProfileTerm(-2.0 * t.coef * t.a, t.p + 1.0, t.a, t.kind))
        return ClosedFormProfile(_merge_terms(new))

    def reduced(self, k: int) -> "ClosedFormProfile":
        """The profile of f' - k f / r."""
        new = []
        for t in self.terms:
            if t.p != k:
                new.append(ProfileTerm(t.coef * (t.p - k), t.p - 1.0, t.a, t.kind))
            if t.kind == "exp":
                new.append(ProfileTerm(-t.coef * t.a, t.p, t.a, t.kind))
            else:
                new.append(ProfileTerm(-2.0 * t.coef * t.a, t.p + 1.0, t.a, t.kind))
        return ClosedFormProfile(_merge_terms(new))

    def scaled(self, coef: complex) -> "ClosedFormProfile":
        return ClosedFormProfile(tuple(
            ProfileTerm(t.coef * coef, t.p, t.a, t.kind) for t in self.terms))

    @property
    def differentiable(self) -> bool:
        return True


def _merge_terms(terms):
    merged = {}
    for t in terms:
        if t.coef == 0:
            continue
        key = (t.p, t.a, t.kind)
        merged[key] = merged.get(key, 0.0 + 0.0j) + complex(t.coef)
    return tuple(ProfileTerm(c, p, a, kind)
                 for (p, a, kind), c in merged.items() if c != 0)


def exp_profile(p: float, a: float, coef: complex = 1.0) -> ClosedFormProfile:
    """coef * r**p * exp(-a r)."""
    return ClosedFormProfile((ProfileTerm(complex(coef), float(p), float(a), "exp"),))


def gauss_profile(p: float, a: float, coef: complex = 1.0) -> ClosedFormProfile:
    """coef * r**p * exp(-a r^2)."""
    return ClosedFormProfile((ProfileTerm(complex(coef), float(p), float(a), "gauss"),))


@dataclass(frozen=True, eq=False)
class GridProfile:
    """Radial samples on a grid, interpolated linearly in log r."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.n,):
            raise ValueError("values must match the grid")
        object.__setattr__(self, "values", values)

    def __call__(self, r):
        t = np.log(np.asarray(r, dtype=float))
        tg = self.grid.t
        if np.iscomplexobj(self.values):
            out = (np.interp(t, tg, self.values.real, left=0.0, right=0.0)
                   + 1j * np.interp(t, tg, self.values.imag, left=0.0, right=0.0))
        else:
            out = np.interp(t, tg, self.values, left=0.0, right=0.0)
        return out if out.ndim else out[()]

    def derivative(self) -> "GridProfile":
        """d/dr by fourth-order differences in the log variable."""
        h = self.grid.t[1] - self.grid.t[0]
        dv = log_derivative(self.values, h)
        return GridProfile(self.grid, dv / self.grid.nodes)

    def reduced(self, k: int) -> "GridProfile":
        h = self.grid.t[1] - self.grid.t[0]
        dv = log_derivative(self.values, h)
        return GridProfile(self.grid, (dv - k * self.values) / self.grid.nodes)

    @property
    def differentiable(self) -> bool:
        return True


def log_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order d/dt of uniformly sampled values (one-sided at the ends)."""
    v = np.asarray(values)
    n = v.size
    if n < 5:
        raise ValueError("need at least five samples for the fourth-order stencil")
    dv = np.empty_like(v)
    dv[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    dv[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    dv[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    dv[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3] + 6.0 * v[-4] - v[-5]) / (12.0 * h)
    dv[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * h)
    return dv


@dataclass(frozen=True)
class SpinorField:
    """Finite channel expansion: tuple of (Channel, profile), one term per k."""

    terms: tuple

    def __post_init__(self):
        ks = [ch.k for ch, _ in self.terms]
        if len(set(ks)) != len(ks):
            raise ValueError("duplicate channel in field")

    @classmethod
    def single(cls, k: int, profile) -> "SpinorField":
        return cls(((Channel(k), profile),))

    @property
    def channels(self):
        return tuple(ch for ch, _ in self.terms)

    def profile(self, k: int):
        for ch, prof in self.terms:
            if ch.k == k:
                return prof
        raise KeyError(f"no channel k={k} in field")

    def sorted_terms(self):
        return sorted(self.terms, key=lambda item: item[0].k)


def radial_sigma_grad(profile, channel):
    """Radial profile of sigma.grad applied to f(r) Omega_k: f' - k f / r."""
    k = channel.k if isinstance(channel, Channel) else int(channel)
    if k == -1:
        raise ValueError("k = -1 is not in the spin-orbit spectrum")
    return profile.reduced(k)


def channel_weights(pair: PotentialPair, channel):
    """The solved channel weight and the residual weight for channel k.

    For k >= 0 returns (g_k, W_k) with
        g_k(r) = r^{-2(k+1)} int_0^r (V1+V2)(s) s^{2(k+1)} ds
        W_k    = V1 + V2 - (2k/r) g_k,
    and for k <= -2 the tail analogue (h_k, W_k = V1 + V2 + (2k/r) h_k).
    Shell terms enter g_k/h_k with their indicator; W_k is reported for the
    density part only.  Both are returned as callables of r.
    """
    k = channel.k if isinstance(channel, Channel) else int(channel)
    if k == -1:
        raise ValueError("k = -1 is not in the spin-orbit spectrum")
    exponent = 2 * (k + 1)
    density = combine([pair.v1_regular, pair.v2])
    bps = density.breakpoints()
    shells = pair.v1_shells

    def g_or_h(r):
        r = float(r)
        if k >= 0:
            val = integrate_radial(lambda s: density(s) * s ** exponent,
                                   a=0.0, b=r, breakpoints=bps).value
        else:
            val = integrate_radial(lambda s: density(s) * s ** exponent,
                                   a=r, b=math.inf, breakpoints=bps).value
        total = val / r ** exponent
        for shell in shells:
            if (k >= 0 and r >= shell.R) or (k < 0 and r <= shell.R):
                total += shell.a * (shell.R / r) ** exponent
        return total

    def w_k(r):
        r = float(r)
        base = float(density(r))
        if k >= 0:
            return base - (2.0 * k / r) * g_or_h(r)
        return base + (2.0 * k / r) * g_or_h(r)

    return g_or_h, w_k


def _as_weight(weight):
    if isinstance(weight, PotentialComponent):
        return weight, weight.breakpoints()
    return weight, ()


def field_norm_weighted(field: SpinorField, weight=None, shells=()) -> float:
    """sum_k int W |f_k|^2 r^2 dr plus shell terms a R^2 |f_k(R)|^2.

    ``weight`` may be a callable of r or a potential component; ``shells``
    are delta-shell measures.  With no weight given the density part uses
    the unit weight, except that a pure shell list means shell terms only.
    Additive over channels by construction; terms are summed in ascending k.
    """
    if weight is None:
        weight = None if shells else (lambda r: 1.0)
    w, bps = _as_weight(weight)
    total = 0.0
    for ch, prof in field.sorted_terms():
        if w is not None:
            integrand = lambda r: float(w(r)) * abs(prof(r)) ** 2 * r * r
            total += integrate_radial(integrand, breakpoints=bps).value
        for shell in shells:
            total += shell.a * shell.R ** 2 * abs(prof(shell.R)) ** 2
    return total


def sigma_grad_norm_weighted(field: SpinorField, weight=None) -> float:
    """sum_k int W |f_k' - k f_k / r|^2 r^2 dr."""
    if weight is None:
        weight = lambda r: 1.0
    w, bps = _as_weight(weight)
    total = 0.0
    for ch, prof in field.sorted_terms():
        reduced = prof.reduced(ch.k)
        integrand = lambda r: float(w(r)) * abs(reduced(r)) ** 2 * r * r
        total += integrate_radial(integrand, breakpoints=bps).value
    return total


# ---------------------------------------------------------------------------
# explicit spinors for k in {0, -2} and the 3D lattice oracle
# ---------------------------------------------------------------------------

_SQRT4PI = math.sqrt(4.0 * math.pi)


def evaluate_spinor(field: SpinorField, x) -> np.ndarray:
    """Evaluate a {0, -2}-channel field at points in R^3.

    Returns complex values of shape x.shape[:-1] + (2,), using the constant
    spinor (1,0)/sqrt(4 pi) for k=0 and its sigma.x_hat partner for k=-2.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 3:
        raise ValueError("points must have a trailing dimension of size 3")
    r = np.sqrt(np.sum(x * x, axis=-1))
    if np.any(r == 0.0):
        raise ValueError("cannot evaluate angular spinors at the origin")
    out = np.zeros(x.shape[:-1] + (2,), dtype=complex)
    for ch, prof in field.terms:
        if ch.k == 0:
            out[..., 0] += prof(r) / _SQRT4PI
        elif ch.k == -2:
            f = prof(r) / _SQRT4PI
            xhat = x / r[..., None]
            out[..., 0] += f * xhat[..., 2]
            out[..., 1] += f * (xhat[..., 0] + 1j * xhat[..., 1])
        else:
            raise ValueError(f"no explicit angular spinor for k={ch.k}")
    return out


def _lattice_axes(spacing: float, extent: float):
    n = max(int(round(2.0 * extent / spacing)), 8)
    return (np.arange(n) - 0.5 * (n - 1)) * spacing


def lattice_sigma_grad_norm(field: SpinorField, spacing: float = 0.05,
                            extent: float = 3.2) -> float:
    """3D central-difference evaluation of int |sigma.grad phi|^2 dx.

    The lattice is staggered off the origin; the field must decay well
    inside ``extent``.  Works plane by plane to keep memory flat.
    """
    xs = _lattice_axes(spacing, extent)
    n = xs.size
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.empty((n, n, 3))
    pts[:, :, 0] = X
    pts[:, :, 1] = Y

    def plane(iz: int) -> np.ndarray:
        pts[:, :, 2] = xs[iz]
        return evaluate_spinor(field, pts)

    total = 0.0
    prev, cur = plane(0), plane(1)
    two_h = 2.0 * spacing
    for iz in range(1, n - 1):
        nxt = plane(iz + 1)
        dz = (nxt - prev) / two_h
        dx = (cur[2:, 1:-1] - cur[:-2, 1:-1]) / two_h
        dy = (cur[1:-1, 2:] - cur[1:-1, :-2]) / two_h
        dzc = dz[1:-1, 1:-1]
        comp0 = dzc[..., 0] + dx[..., 1] - 1j * dy[..., 1]
        comp1 = dx[..., 0] + 1j * dy[..., 0] - dzc[..., 1]
        total += float(np.sum(np.abs(comp0) ** 2 + np.abs(comp1) ** 2))
        prev, cur = cur, nxt
    return total * spacing ** 3


def lattice_weighted_norm(field: SpinorField, weight=None, spacing: float = 0.05,
                          extent: float = 3.2) -> float:
    """3D lattice quadrature of int W |phi|^2 dx (W radial, default 1)."""
    xs = _lattice_axes(spacing, extent)
    n = xs.size
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    pts = np.empty((n, n, 3))
    pts[:, :, 0] = X
    pts[:, :, 1] = Y
    w = weight if weight is not None else (lambda r: 1.0)
    total = 0.0
    for iz in range(n):
        pts[:, :, 2] = xs[iz]
        phi = evaluate_spinor(field, pts)
        r = np.sqrt(X * X + Y * Y + xs[iz] ** 2)
        wv = np.asarray(w(r), dtype=float)
        total += float(np.sum(wv * np.sum(np.abs(phi) ** 2, axis=-1)))
    return total * spacing ** 3


# ---------------------------------------------------------------------------
# profile grammar
# ---------------------------------------------------------------------------

def parse_profile(text: str) -> ClosedFormProfile:
    """Parse "exp:p,a" -> r^p e^{-a r} or "gauss:p,a" -> r^p e^{-a r^2}."""
    text = text.strip()
    for prefix, builder in (("exp:", exp_profile), ("gauss:", gauss_profile)):
        if text.startswith(prefix):
            parts = text[len(prefix):].split(",")
            if len(parts) != 2:
                raise ValueError(f"profile {text!r} needs two parameters p,a")
            return builder(float(parts[0]), float(parts[1]))
    raise ValueError(f"unknown profile {text!r}")


def parse_field_term(text: str):
    """Parse "k=<int>:<profile>" into (k, profile)."""
    text = text.strip()
    if not text.startswith("k="):
        raise ValueError(f"field term {text!r} must start with 'k='")
    head, _, rest = text[2:].partition(":")
    return int(head), parse_profile(rest)


def build_field(term_texts) -> SpinorField:
    terms = []
    for text in term_texts:
        k, prof = parse_field_term(text)
        terms.append((Channel(k), prof))
    return SpinorField(tuple(terms))
