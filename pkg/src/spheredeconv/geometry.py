"""Geometry of the latent sphere: angle parametrization, angular densities,
sampling, and density serialization.

Angles live in the unit box [0, 1]^{d-1}.  The first angle is a full turn
(2 pi u_1), the remaining ones are half turns (pi u_j), so the map covers
the unit sphere in R^d exactly once.

Circle densities (d = 2) are represented either by truncated Fourier
coefficients c_k = int_0^1 f(u) exp(+2i pi k u) du, k = -K..K, or by a raw
callable; higher dimensions use callables only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

# compactness bound on sum_{k != 0} |c_k|^2 for Fourier densities
COEFF_NORM_BOUND = 10.0


def sphere_map(u):
    """Map angles u in [0, 1]^{d-1} to a unit vector in R^d.

    Accepts a single point (scalar for d = 2, or a length d-1 vector) or a
    batch of shape (n, d-1); returns shape (d,) or (n, d) accordingly.
    """
    arr = np.asarray(u, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    single = arr.ndim == 1
    pts = arr[None, :] if single else arr
    if pts.ndim != 2 or pts.shape[1] < 1:
        raise ValueError("u must be a (d-1)-vector or an (n, d-1) batch")
    if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
        raise ValueError("angles must lie in the unit box [0, 1]^{d-1}")
    n, dm1 = pts.shape
    out = np.empty((n, dm1 + 1))
    full_turn = 2.0 * np.pi * pts[:, 0]
    out[:, 0] = np.cos(full_turn)
    running = np.sin(full_turn)
    for j in range(1, dm1):
        half_turn = np.pi * pts[:, j]
        out[:, j] = running * np.cos(half_turn)
        running = running * np.sin(half_turn)
    out[:, dm1] = running
    return out[0] if single else out


def fourier_series(coeffs, x):
    """Evaluate sum_k c_k exp(-2i pi k x), k = -K..K, unclipped.

    Real-valued when the coefficients are conjugate-symmetric; the real
    part is returned.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size % 2 == 0:
        raise ValueError("coeffs must have odd length 2K+1")
    k_cut = c.size // 2
    x_arr = np.asarray(x, dtype=float)
    ks = np.arange(-k_cut, k_cut + 1)
    phases = np.exp(-2j * np.pi * np.multiply.outer(x_arr, ks))
    return np.real(phases @ c)


@dataclass(eq=False)
class FourierDensity:
    """Circle density stored as Fourier coefficients c_{-K}..c_K.

    Conventions: c_k = int_0^1 f(u) exp(+2i pi k u) du, so that
    f(u) = sum_k c_k exp(-2i pi k u).  Unit mass forces c_0 = 1, realness
    forces c_{-k} = conj(c_k), and sum_{k != 0} |c_k|^2 must stay below
    norm_bound (a compactness constraint on the admissible class).
    """

    coeffs: np.ndarray
    norm_bound: float = COEFF_NORM_BOUND
    name: str | None = None

    def __post_init__(self) -> None:
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coeffs must be a vector of odd length 2K+1 for k = -K..K")
        k_cut = c.size // 2
        if abs(c[k_cut] - 1.0) > 1e-12:
            raise ValueError("c_0 must equal 1 (unit mass)")
        if np.max(np.abs(np.conj(c[::-1]) - c)) > 1e-12:
            raise ValueError("coefficients must satisfy c_{-k} = conj(c_k)")
        off_mass = float(np.sum(np.abs(c) ** 2)) - abs(c[k_cut]) ** 2
        if off_mass > self.norm_bound + 1e-12:
            raise ValueError(
                f"sum_(k!=0) |c_k|^2 = {off_mass:.6g} exceeds the bound {self.norm_bound:g}"
            )
        c.flags.writeable = False
        self.coeffs = c

    @property
    def cutoff(self) -> int:
        return self.coeffs.size // 2

    @property
    def dim_minus_1(self) -> int:
        return 1

    @classmethod
    def from_half(cls, half: Sequence[complex], norm_bound: float = COEFF_NORM_BOUND) -> "FourierDensity":
        """Build from c_1..c_K alone; c_0 = 1 and negative k by conjugation."""
        h = np.asarray(half, dtype=complex).ravel()
        full = np.concatenate([np.conj(h[::-1]), [1.0 + 0.0j], h])
        return cls(full, norm_bound)

    @classmethod
    def uniform(cls, name: str | None = None) -> "FourierDensity":
        return cls(np.array([1.0 + 0.0j]), name=name)


@dataclass(eq=False)
class CallableDensity:
    """Density on [0, 1]^{d-1} given as a vectorized callable.

    fn maps an (n, d-1) array to n nonnegative values and must integrate
    to 1 over the unit box (checked at construction with ~1e4 quadrature
    nodes).  factors, when provided, are per-axis 1-d callables whose
    product equals fn; they enable inverse-CDF sampling for d > 2.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    dim_minus_1: int = 1
    name: str | None = None
    factors: tuple | None = None

    def __post_init__(self) -> None:
        if self.dim_minus_1 < 1:
            raise ValueError("dim_minus_1 must be >= 1")
        mass = _unit_box_integral(self.fn, self.dim_minus_1)
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"density integrates to {mass:.8f}, not 1")


AngleDensity = Union[FourierDensity, CallableDensity]


def _axis_node_count(dim_minus_1: int) -> int:
    # ~1e4 total quadrature nodes, split across axes
    return {1: 10_001, 2: 101}.get(dim_minus_1, max(9, int(round(10_000 ** (1.0 / dim_minus_1)))))


def _unit_box_grid(dim_minus_1: int, per_axis: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor trapezoid nodes and weights on [0, 1]^{d-1}."""
    xs = np.linspace(0.0, 1.0, per_axis)
    w1 = np.full(per_axis, 1.0 / (per_axis - 1))
    w1[0] *= 0.5
    w1[-1] *= 0.5
    if dim_minus_1 == 1:
        return xs[:, None], w1
    grids = np.meshgrid(*([xs] * dim_minus_1), indexing="ij")
    nodes = np.column_stack([g.ravel() for g in grids])
    wgrids = np.meshgrid(*([w1] * dim_minus_1), indexing="ij")
    weights = np.ones(nodes.shape[0])
    for g in wgrids:
        weights *= g.ravel()
    return nodes, weights


def _unit_box_integral(fn, dim_minus_1: int) -> float:
    nodes, weights = _unit_box_grid(dim_minus_1, _axis_node_count(dim_minus_1))
    return float(np.asarray(fn(nodes), dtype=float) @ weights)


def uniform_density(dim_minus_1: int = 1) -> AngleDensity:
    """Uniform angular density; Fourier form on the circle, callable above."""
    if dim_minus_1 == 1:
        return FourierDensity.uniform(name="uniform")
    return CallableDensity(
        lambda u: np.ones(u.shape[0]), dim_minus_1=dim_minus_1, name="uniform",
        factors=tuple(lambda x: np.ones_like(x) for _ in range(dim_minus_1)),
    )


def vonmises_like() -> CallableDensity:
    """Smooth unimodal circle density proportional to exp(cos(2 pi u))."""
    raw = lambda u: np.exp(np.cos(2.0 * np.pi * np.asarray(u)[:, 0]))
    z = _unit_box_integral(raw, 1)
    return CallableDensity(lambda u: raw(u) / z, dim_minus_1=1, name="vonmises_like")


def density_eval(f: AngleDensity, u):
    """Pointwise density values, clipped at zero.

    Clipping matters only for Fourier densities whose trigonometric series
    dips below zero; the rejection sampler targets this clipped version.
    Model characteristic functions use the unclipped series instead.
    """
    pts = np.asarray(u, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None] if f.dim_minus_1 == 1 and pts.size != f.dim_minus_1 else pts[None, :]
    if pts.shape[1] != f.dim_minus_1:
        raise ValueError("points have the wrong number of angle coordinates")
    if isinstance(f, FourierDensity):
        vals = fourier_series(f.coeffs, pts[:, 0])
    else:
        vals = np.asarray(f.fn(pts), dtype=float)
    return np.maximum(vals, 0.0)


def fourier_coefficient(f: AngleDensity, k: int) -> complex:
    """c_k = int_0^1 f(u) exp(+2i pi k u) du; exact for Fourier densities,
    ~1e4-node quadrature for circle callables."""
    if isinstance(f, FourierDensity):
        if abs(k) <= f.cutoff:
            return complex(f.coeffs[k + f.cutoff])
        return 0.0 + 0.0j
    if f.dim_minus_1 != 1:
        raise ValueError("Fourier coefficients are defined for circle densities only")
    nodes, weights = _unit_box_grid(1, _axis_node_count(1))
    vals = np.asarray(f.fn(nodes), dtype=float)
    return complex(np.sum(vals * np.exp(2j * np.pi * k * nodes[:, 0]) * weights))


def sphere_mean(f: AngleDensity) -> np.ndarray:
    """Barycenter integral S-bar(f) = int S(u) f(u) du in R^d.

    On the circle this is (Re c_1, Im c_1); otherwise tensor quadrature.
    """
    if isinstance(f, FourierDensity):
        c1 = fourier_coefficient(f, 1)
        return np.array([c1.real, c1.imag])
    nodes, weights = _unit_box_grid(f.dim_minus_1, _axis_node_count(f.dim_minus_1))
    vals = np.asarray(f.fn(nodes), dtype=float)
    return sphere_map(nodes).T @ (vals * weights)


def _sup_estimate(f: AngleDensity) -> float:
    """Envelope constant for rejection sampling: grid sup times 1.01.

    A fixed grid can miss very narrow spikes; densities handled here are
    smooth trigonometric polynomials or user callables of similar scale.
    """
    dm1 = f.dim_minus_1
    per_axis = 1024 if dm1 == 1 else (64 if dm1 == 2 else 17)
    xs = (np.arange(per_axis) + 0.5) / per_axis
    if dm1 == 1:
        pts = xs[:, None]
    else:
        grids = np.meshgrid(*([xs] * dm1), indexing="ij")
        pts = np.column_stack([g.ravel() for g in grids])
    return float(np.max(density_eval(f, pts))) * 1.01


def sample_angles(f: AngleDensity, n: int, seed) -> np.ndarray:
    """Draw n i.i.d. angle vectors from f; returns shape (n, d-1).

    Deterministic given the seed (PCG64 stream).  Fourier densities and
    generic callables use rejection sampling from the uniform envelope;
    product-form callables use per-axis inverse-CDF tables.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    dm1 = f.dim_minus_1
    if isinstance(f, CallableDensity) and f.factors is not None:
        cols = []
        grid = np.linspace(0.0, 1.0, 4097)
        for fac in f.factors:
            pdf = np.asarray(fac(grid), dtype=float)
            cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
            cdf /= cdf[-1]
            cols.append(np.interp(rng.random(n), cdf, grid))
        return np.column_stack(cols)
    envelope = max(_sup_estimate(f), 1e-12)
    out = np.empty((n, dm1))
    filled = 0
    while filled < n:
        want = n - filled
        batch = max(int(want * envelope * 1.2) + 16, 64)
        cand = rng.random((batch, dm1))
        height = rng.random(batch) * envelope
        accept = height <= density_eval(f, cand)
        take = min(int(accept.sum()), want)
        out[filled : filled + take] = cand[accept][:take]
        filled += take
    return out


def density_to_json(f: AngleDensity) -> str:
    """Serialize a density; the named form round-trips named presets."""
    if getattr(f, "name", None) in _NAMED_DENSITIES:
        payload = {"type": "named", "name": f.name}
    elif isinstance(f, FourierDensity):
        payload = {"type": "fourier", "coeffs": [[c.real, c.imag] for c in f.coeffs]}
    else:
        raise ValueError("callable densities without a registered name cannot be serialized")
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def density_from_json(text: str) -> AngleDensity:
    payload = json.loads(text)
    kind = payload.get("type")
    if kind == "fourier":
        coeffs = np.array([complex(re, im) for re, im in payload["coeffs"]])
        return FourierDensity(coeffs)
    if kind == "named":
        name = payload.get("name")
        if name not in _NAMED_DENSITIES:
            raise ValueError(f"unknown named density {name!r}")
        return _NAMED_DENSITIES[name]()
    raise ValueError(f"unknown density type {kind!r}")


_NAMED_DENSITIES: dict[str, Callable[[], AngleDensity]] = {
    "uniform": lambda: uniform_density(1),
    "vonmises_like": vonmises_like,
}
