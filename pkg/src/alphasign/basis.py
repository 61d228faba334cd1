"""B-spline sieve designs and per-asset least-squares residualization.

A panel of T observations on N assets is regressed, asset by asset, on a
design built from a clamped B-spline basis in rescaled time u = t/T. The
design couples a *centered* intercept-basis block with one basis block per
factor, each multiplied by that factor's realization. Centering the
intercept block keeps the time-averaged intercept of every asset out of
the fitted span, so it survives in the residuals; the test statistics
downstream probe exactly that surviving component. A twin design with the
*uncentered* intercept block absorbs the averaged intercept instead and
supplies the residuals used by variance/trace estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, SingularDesignError

# Reciprocal condition number below which a design is treated as singular.
RCOND_MIN = 1e-12


@dataclass(frozen=True)
class SplineConfig:
    """Clamped B-spline space on [0, 1].

    Parameters
    ----------
    interior_knots : int
        Number of uniformly spaced interior knots (n >= 0).
    order : int
        Spline order (polynomial degree + 1). Order 3 gives quadratics.
    """

    interior_knots: int
    order: int = 3

    def __post_init__(self):
        if self.order < 1:
            raise ContractError(f"spline order must be >= 1, got {self.order}")
        if self.interior_knots < 0:
            raise ContractError(
                f"interior knot count must be >= 0, got {self.interior_knots}"
            )

    @property
    def basis_dim(self) -> int:
        """Number of basis functions L = interior_knots + order."""
        return self.interior_knots + self.order


def make_knots(interior_knots: int, order: int = 3) -> np.ndarray:
    """Clamped knot vector on [0, 1] with uniform interior knots.

    Interior knot i (1-based) sits at i / (interior_knots + 1); both
    boundary knots are repeated `order` times so the basis is clamped.
    """
    if interior_knots < 0:
        raise ContractError("interior_knots must be >= 0")
    if order < 1:
        raise ContractError("order must be >= 1")
    inner = np.arange(1, interior_knots + 1) / (interior_knots + 1)
    return np.concatenate([np.zeros(order), inner, np.ones(order)])


def _basis_matrix(knots: np.ndarray, order: int, u: np.ndarray) -> np.ndarray:
    """Evaluate all basis functions at the points u via the Cox-de Boor recursion.

    Returns an array of shape (len(u), L). The support convention is
    half-open intervals, closed at the right boundary so the basis still
    sums to one at u = 1.
    """
    u = np.asarray(u, dtype=float)
    nk = knots.size
    left, right = knots[:-1], knots[1:]
    B = ((u[:, None] >= left) & (u[:, None] < right)).astype(float)
    at_end = u == knots[-1]
    if np.any(at_end):
        last = np.nonzero(right > left)[0][-1]
        B[at_end, :] = 0.0
        B[at_end, last] = 1.0
    for k in range(2, order + 1):
        cols = nk - k
        nb = np.zeros((u.size, cols))
        for i in range(cols):
            den1 = knots[i + k - 1] - knots[i]
            den2 = knots[i + k] - knots[i + 1]
            if den1 > 0.0:
                nb[:, i] += (u - knots[i]) / den1 * B[:, i]
            if den2 > 0.0:
                nb[:, i] += (knots[i + k] - u) / den2 * B[:, i + 1]
        B = nb
    return B


def bspline_basis(config: SplineConfig, knots: np.ndarray, u: float) -> np.ndarray:
    """Vector of the L basis function values at a single point u in [0, 1]."""
    if not 0.0 <= u <= 1.0:
        raise ContractError(f"evaluation point must lie in [0, 1], got {u}")
    return _basis_matrix(np.asarray(knots, dtype=float), config.order, np.array([u]))[0]


def _as_factor_matrix(factors) -> np.ndarray:
    f = np.asarray(factors, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    if f.ndim != 2:
        raise ContractError(f"factors must be a T x p matrix, got ndim={f.ndim}")
    if not np.all(np.isfinite(f)):
        raise ContractError("factors contain non-finite values")
    return f


def _effective_rcond(s: np.ndarray, structural_nullity: int = 0) -> float:
    """Reciprocal condition number from singular values, ignoring nulls
    that are present by construction.

    The centered intercept-basis block always contains exactly one exact
    linear dependency: the uncentered basis sums to one at every point, so
    the centered columns sum to zero. Passing structural_nullity=1 excludes
    that expected zero singular value from the conditioning measure; any
    deficiency beyond it still drives the result to ~0.
    """
    if s.size == 0 or s[0] <= 0.0:
        return 0.0
    keep = s.size - structural_nullity
    if keep < 1:
        return 0.0
    return float(s[keep - 1] / s[0])


def _name_singular_block(
    blocks: list[np.ndarray], p: int, first_block_nullity: int = 0
) -> str:
    names = ["intercept-basis block"] + [f"factor {j + 1} block" for j in range(p)]
    acc = None
    for name, blk in zip(names, blocks):
        acc = blk if acc is None else np.hstack([acc, blk])
        keep = acc.shape[1] - first_block_nullity
        if keep < 1:
            continue
        s = np.linalg.svd(acc, compute_uv=False)
        if _effective_rcond(s, first_block_nullity) <= RCOND_MIN:
            return name
    return "combined design"


@dataclass(frozen=True)
class DesignMatrix:
    """Sieve design pair for one panel length.

    Attributes
    ----------
    Z : (T, (1+p)L) array
        Centered intercept-basis block followed by p factor blocks. The
        centered block carries one exact linear dependency by construction
        (its columns sum to zero), so Z has column rank (1+p)L - 1; every
        quantity derived from it here depends only on its column span.
    Z_tilde : (T, (1+p)L) array
        Same layout with the uncentered intercept-basis block; full rank.
    omega_T : float
        1' M 1 where M is the annihilator of Z; equals the squared norm of h.
    h : (T,) array
        Annihilated ones vector M 1. Under a fully centered design h = 1.
    """

    Z: np.ndarray
    Z_tilde: np.ndarray
    omega_T: float
    h: np.ndarray
    config: SplineConfig
    n_factors: int
    _q: np.ndarray = field(repr=False, default=None)

    @property
    def n_obs(self) -> int:
        return self.Z.shape[0]

    @property
    def n_columns(self) -> int:
        return self.Z.shape[1]

    def annihilate(self, v: np.ndarray) -> np.ndarray:
        """Project v onto the orthogonal complement of the column span of Z.

        Uses an orthonormal basis of the span truncated to the effective
        rank, so the built-in dependency of the centered block contributes
        no spurious direction.
        """
        v = np.asarray(v, dtype=float)
        return v - self._q @ (self._q.T @ v)


def build_design(
    factors, config: SplineConfig, h_from: str = "centered"
) -> DesignMatrix:
    """Assemble the centered/uncentered design pair for a factor matrix.

    Parameters
    ----------
    factors : (T, p) array
        Factor realizations; p = 0 (shape (T, 0)) yields an intercept-only
        design.
    config : SplineConfig
    h_from : {"centered", "uncentered"}
        Which design's annihilator produces h and omega_T. The uncentered
        variant is exposed for diagnostics only: the ones vector lies in
        the span of the uncentered intercept block, so h degenerates to
        (numerical) zero there.
    """
    if h_from not in ("centered", "uncentered"):
        raise ContractError(f"h_from must be 'centered' or 'uncentered', got {h_from!r}")
    f = _as_factor_matrix(factors)
    T, p = f.shape
    L = config.basis_dim
    K = (1 + p) * L
    if T < K + 1:
        raise ContractError(
            f"need T >= (1+p)L + 1 = {K + 1} observations, got T={T}"
        )
    knots = make_knots(config.interior_knots, config.order)
    u = np.arange(1, T + 1) / T
    B = _basis_matrix(knots, config.order, u)
    B_centered = B - B.mean(axis=0)
    blocks = [B_centered] + [f[:, [j]] * B for j in range(p)]
    Z = np.hstack(blocks)
    Z_tilde = np.hstack([B] + blocks[1:])
    # Rank contract: Z carries exactly one built-in dependency (see class
    # docstring), Z_tilde none. Anything worse is a genuine singularity.
    u_left, s, _ = np.linalg.svd(Z, full_matrices=False)
    if _effective_rcond(s, structural_nullity=1) <= RCOND_MIN:
        raise SingularDesignError(
            "design matrix is rank deficient beyond the built-in dependency "
            "of the centered intercept block (first failing prefix: "
            f"{_name_singular_block(blocks, p, first_block_nullity=1)})"
        )
    s_tilde = np.linalg.svd(Z_tilde, compute_uv=False)
    if _effective_rcond(s_tilde) <= RCOND_MIN:
        raise SingularDesignError(
            "uncentered design matrix is rank deficient (first failing "
            f"prefix: {_name_singular_block([B] + blocks[1:], p)})"
        )
    q = u_left[:, : K - 1]
    ones = np.ones(T)
    if h_from == "centered":
        h = ones - q @ (q.T @ ones)
    else:
        q2, _ = np.linalg.qr(Z_tilde)
        h = ones - q2 @ (q2.T @ ones)
    omega = float(np.clip(h @ h, 0.0, float(T)))
    return DesignMatrix(
        Z=Z,
        Z_tilde=Z_tilde,
        omega_T=omega,
        h=h,
        config=config,
        n_factors=p,
        _q=q,
    )


@dataclass(frozen=True)
class FitResult:
    """Per-asset least-squares output.

    coefficients has one row per asset (N x (1+p)L, centered design) and is
    the minimum-norm least-squares solution: the centered design's built-in
    dependency leaves individual coefficients identified only up to one null
    direction, while fitted values and residuals are unique. residuals come
    from the centered design, residuals_tilde from the uncentered twin.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    residuals_tilde: np.ndarray


def fit_panel(panel, design: DesignMatrix) -> FitResult:
    """Regress every asset's return series on the design pair.

    No intercept is added: the centered design leaves each asset's
    time-averaged intercept in `residuals`, while `residuals_tilde`
    absorbs it.
    """
    Y = np.asarray(panel, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise ContractError(f"panel must be a T x N matrix, got ndim={Y.ndim}")
    if Y.shape[0] != design.n_obs:
        raise ContractError(
            f"panel has {Y.shape[0]} rows but design expects {design.n_obs}"
        )
    if not np.all(np.isfinite(Y)):
        raise ContractError("panel contains non-finite values")
    s = np.linalg.svd(design.Z, compute_uv=False)
    s_tilde = np.linalg.svd(design.Z_tilde, compute_uv=False)
    if (
        _effective_rcond(s, structural_nullity=1) <= RCOND_MIN
        or _effective_rcond(s_tilde) <= RCOND_MIN
    ):
        raise SingularDesignError("design is too ill conditioned to fit")
    coef, *_ = np.linalg.lstsq(design.Z, Y, rcond=RCOND_MIN)
    resid = Y - design.Z @ coef
    coef_t, *_ = np.linalg.lstsq(design.Z_tilde, Y, rcond=RCOND_MIN)
    resid_t = Y - design.Z_tilde @ coef_t
    return FitResult(
        coefficients=coef.T, residuals=resid, residuals_tilde=resid_t
    )


def bic_penalty(N: int, T: int, n_factors: int, config: SplineConfig) -> float:
    """Complexity charge log(NT)/(NT) * (p+1) * L used by the knot criterion."""
    nt = N * T
    return math.log(nt) / nt * (n_factors + 1) * config.basis_dim


def bic_score(panel, factors, config: SplineConfig) -> float:
    """Information criterion for one interior-knot count.

    The goodness-of-fit term is the log mean squared residual of the
    uncentered-design fit, whose span contains the constant and therefore
    absorbs any time-averaged intercept before the fit is scored.
    """
    Y = np.asarray(panel, dtype=float)
    fit = fit_panel(Y, build_design(factors, config))
    rss_mean = float(np.mean(fit.residuals_tilde**2))
    if rss_mean <= 0.0:
        # exact interpolation: push the criterion to -inf so it wins
        return -math.inf
    N = Y.shape[1] if Y.ndim == 2 else 1
    return math.log(rss_mean) + bic_penalty(N, Y.shape[0], _as_factor_matrix(factors).shape[1], config)


def default_knot_candidates(T: int) -> range:
    """Default search range 1 .. ceil(T^(1/5)) + 4."""
    return range(1, math.ceil(T ** 0.2) + 5)


def select_knots_bic(panel, factors, candidates=None, order: int = 3) -> int:
    """Pick the interior-knot count minimizing the information criterion.

    Candidates that violate fit preconditions or produce singular designs
    are skipped; ties break toward the smaller knot count. Raises if every
    candidate is unusable.
    """
    if candidates is None:
        candidates = default_knot_candidates(np.asarray(panel).shape[0])
    cand = sorted(set(int(c) for c in candidates))
    if not cand:
        raise ContractError("candidate set for knot selection is empty")
    best_n, best_score = None, math.inf
    failures = []
    for n in cand:
        try:
            score = bic_score(panel, factors, SplineConfig(n, order))
        except (SingularDesignError, ContractError) as exc:
            failures.append(f"n={n}: {exc}")
            continue
        if score < best_score:
            best_n, best_score = n, score
    if best_n is None:
        raise SingularDesignError(
            "no knot candidate produced a usable design: " + "; ".join(failures)
        )
    return best_n
