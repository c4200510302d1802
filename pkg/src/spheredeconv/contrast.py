"""Contrast functionals measuring how far a candidate (f, R) is from
explaining the observed characteristic function.

The key algebraic fact: with independent noise coordinates, the joint
characteristic function of the observations factors as Psi(t) Phi_eps(t)
with Phi_eps(t1, t2) = Phi_1(t1) Phi_2(t2).  Consequently

    Psi_cand(t) psi~(t1, 0) psi~(0, t2) - psi~(t) Psi_cand(t1, 0) Psi_cand(0, t2)

vanishes identically (up to sampling error in the ECF psi~) exactly when
the candidate matches the truth, without knowing the noise law.  The
empirical contrast integrates the squared modulus of this quantity over
the frequency box; the population version replaces the ECF by the true
product and weights by |Phi_eps|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charfn import EcfCache, EvalGrid, ecf, psi_model, psi_model_marginals
from .geometry import AngleDensity


@dataclass(eq=False)
class ContrastContext:
    """Grid plus the sample's ECF values, reused across many evaluations."""

    grid: EvalGrid
    cache: EcfCache

    @classmethod
    def from_sample(cls, sample, grid: EvalGrid) -> "ContrastContext":
        return cls(grid, ecf(sample, grid))


def _combine(
    psi1: np.ndarray,
    psi2: np.ndarray,
    psi_full: np.ndarray,
    ref1: np.ndarray,
    ref2: np.ndarray,
    ref_full: np.ndarray,
    w1: np.ndarray,
    w2: np.ndarray,
    extra_weight: np.ndarray | None = None,
) -> float:
    """Quadrature of |psi_full ref1 ref2 - ref_full psi1 psi2|^2 over the box.

    numpy's pairwise reductions keep the summation order fixed, so the
    value is deterministic for given inputs.
    """
    diff = psi_full * np.multiply.outer(ref1, ref2) - ref_full * np.multiply.outer(psi1, psi2)
    integrand = diff.real**2 + diff.imag**2
    if extra_weight is not None:
        integrand = integrand * extra_weight
    return float(w1 @ integrand @ w2)


def contrast_mn(f: AngleDensity, radius: float, ctx: ContrastContext, **psi_kwargs) -> float:
    """Empirical contrast of the candidate (f, R) against the sample ECF.

    Nonnegative; zero exactly when the candidate's characteristic-function
    products reproduce the ECF's on the whole grid.
    """
    psi1, psi2, psi_full = psi_model_marginals(f, radius, ctx.grid, **psi_kwargs)
    cache = ctx.cache
    return _combine(
        psi1,
        psi2,
        psi_full,
        cache.marg1,
        cache.marg2,
        cache.full,
        ctx.grid.axis1_weights,
        ctx.grid.axis2_weights,
    )


def contrast_mn_precomputed(
    psi1: np.ndarray, psi2: np.ndarray, psi_full: np.ndarray, ctx: ContrastContext
) -> float:
    """contrast_mn when the candidate's Psi values are already on the grid.

    Hot path for optimizers that cache the grid geometry; identical
    combination step as contrast_mn.
    """
    cache = ctx.cache
    return _combine(
        psi1,
        psi2,
        psi_full,
        cache.marg1,
        cache.marg2,
        cache.full,
        ctx.grid.axis1_weights,
        ctx.grid.axis2_weights,
    )


def contrast_m_oracle(
    f: AngleDensity,
    radius: float,
    f_star: AngleDensity,
    r_star: float,
    noise,
    nu: float = 0.5,
    nodes_per_axis: int = 33,
    dim: int = 2,
    **psi_kwargs,
) -> float:
    """Population contrast: the ECF is replaced by the true characteristic
    function products, and the integrand is weighted by |Phi_eps(t)|^2.

    Requires a noise model exposing a closed-form characteristic function
    (char_fn plus has_char_fn).  Zero exactly at the truth; positive at any
    candidate generating a different observation law.
    """
    if not getattr(noise, "has_char_fn", False) or not hasattr(noise, "char_fn"):
        raise ValueError("noise model does not expose a closed-form characteristic function")
    grid = EvalGrid.build(dim=dim, nu_est=nu, nodes_per_axis=nodes_per_axis)
    cand1, cand2, cand_full = psi_model_marginals(f, radius, grid, **psi_kwargs)
    true1, true2, true_full = psi_model_marginals(f_star, r_star, grid, **psi_kwargs)
    phi = noise.char_fn(grid.full_points()).reshape(grid.m1, grid.m2)
    weight = phi.real**2 + phi.imag**2
    return _combine(
        cand1,
        cand2,
        cand_full,
        true1,
        true2,
        true_full,
        grid.axis1_weights,
        grid.axis2_weights,
        extra_weight=weight,
    )
