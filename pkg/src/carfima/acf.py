"""Autocovariance of the stationary process by three cross-validating routes.

* closed eigen-expansion over the companion eigenvalues (the production
  path when the eigenvalues are distinct),
* adaptive quadrature of the defining matrix-integral form (fallback and
  oracle),
* the exact matrix expression at H = 1/2, where the process degenerates
  to a CARMA process.

Also provides the stationary state covariance (Lyapunov solve), the
power-law tail asymptote and cov(Y_0, B^H_t).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.linalg import expm
from scipy.special import gamma as gamma_fn

from .errors import (
    CarfimaError,
    DomainError,
    QuadratureError,
    RepeatedEigenvaluesError,
    SingularLyapunovError,
)
from .model import CarfimaModel, ModelParts, char_poly_eval, prepare
from .specfun import u_kernel

# Near the CARMA point the kernel formula cancels badly; dispatch to the
# exact H = 1/2 route inside this band.
CARMA_DISPATCH_BAND = 1e-6

LYAPUNOV_RESIDUAL_RTOL = 1e-8

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


@dataclass(frozen=True)
class StationaryStateCov:
    """Stationary covariance V* of the state vector at H = 1/2."""

    Vstar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Vstar", np.asarray(self.Vstar, dtype=float))
        self.Vstar.setflags(write=False)


@dataclass(frozen=True)
class AcfTable:
    """Autocovariance values on a lag grid with their provenance."""

    lags: np.ndarray
    values: np.ndarray
    method: str  # closed_form | quadrature | carma_exact | fourier | empirical
    model_hash: str

    def __post_init__(self):
        lags = np.asarray(self.lags, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if lags.shape != values.shape or lags.ndim != 1:
            raise DomainError("lags and values must be 1-d arrays of equal length")
        if np.any(np.diff(lags) <= 0):
            raise DomainError("lags must be strictly ascending")
        if not np.all(np.isfinite(values)):
            raise DomainError("autocovariance values must be finite")
        if lags[0] == 0.0 and self.method != "empirical":
            g0 = values[0]
            if g0 < 0 or np.any(np.abs(values) > g0 * (1 + 1e-8) + 1e-12):
                raise CarfimaError("lag-0 autocovariance must dominate the table")
        object.__setattr__(self, "lags", lags)
        object.__setattr__(self, "values", values)
        lags.setflags(write=False)
        values.setflags(write=False)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lag", "gamma", "method"])
            for lag, val in zip(self.lags, self.values):
                w.writerow([repr(float(lag)), repr(float(val)), self.method])

    @classmethod
    def from_csv(cls, path, model_hash: str = "") -> "AcfTable":
        lags, values, method = [], [], "closed_form"
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                lags.append(float(row["lag"]))
                values.append(float(row["gamma"]))
                method = row["method"]
        return cls(lags=np.array(lags), values=np.array(values), method=method,
                   model_hash=model_hash)


def vstar(sys, model: CarfimaModel) -> StationaryStateCov:
    """Solve A V* + V* A' = -sigma^2 delta_p delta_p' by a Kronecker solve."""
    p = model.p
    A = sys.A
    rhs = -(model.sigma**2) * np.outer(sys.delta_p, sys.delta_p)
    K = np.kron(np.eye(p), A) + np.kron(A, np.eye(p))
    try:
        v = np.linalg.solve(K, rhs.flatten(order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularLyapunovError(str(exc)) from exc
    V = v.reshape((p, p), order="F")
    V = 0.5 * (V + V.T)
    resid = np.max(np.abs(A @ V + V @ A.T + (model.sigma**2) * np.outer(sys.delta_p, sys.delta_p)))
    if not np.isfinite(resid) or resid > LYAPUNOV_RESIDUAL_RTOL * model.sigma**2:
        raise SingularLyapunovError(
            f"Lyapunov residual {resid:.3e} exceeds {LYAPUNOV_RESIDUAL_RTOL:.0e}*sigma^2"
        )
    return StationaryStateCov(Vstar=V)


def vstar_integral(sys, model: CarfimaModel, rtol: float = 1e-12) -> np.ndarray:
    """V* from its defining integral, by quadrature.  Test oracle only."""
    U = _decay_horizon(sys.A, rtol=1e-16)
    p = model.p

    def cell(i, j):
        def f(u):
            g = expm(sys.A * u) @ sys.delta_p
            return g[i] * g[j]

        val, err = quad(f, 0.0, U, epsabs=1e-14, epsrel=rtol, limit=400)
        return val

    V = np.array([[cell(i, j) for j in range(p)] for i in range(p)])
    return model.sigma**2 * 0.5 * (V + V.T)


def _decay_horizon(A, rtol: float = 1e-14, weight_exp: float = 0.0) -> float:
    """U with ||e^{AU}|| * U^weight_exp below rtol, verified directly."""
    eigs = np.linalg.eigvals(A)
    nu = float(np.max(eigs.real))
    if nu >= 0:
        raise DomainError("decay horizon requires a stable matrix")
    U = max(math.log(1.0 / rtol) / abs(nu), 1.0)
    for _ in range(200):
        norm = np.linalg.norm(expm(A * U), 2) * U**weight_exp
        if norm <= rtol:
            return U
        U *= 1.5
    raise QuadratureError("could not find a decay horizon for the tail truncation")


def _checked_quad(f, a, b, scale):
    val, err = quad(f, a, b, **_QUAD_OPTS)
    if err > 1e-6 * max(abs(val), scale):
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} too large for value {val:.6e}"
        )
    return val


def _int_power_weight(f, c, H, scale):
    """int_0^c f(u) u^{2H-1} du with the endpoint singularity substituted away.

    For H < 1/2 the substitution u = v^{1/(2H)} gives a constant weight; for
    H >= 1/2, u = v^2 makes the integrand C^1 at the origin.
    """
    if c <= 0:
        return 0.0
    if H < 0.5:
        g = 1.0 / (2.0 * H)
        return _checked_quad(lambda v: f(v**g), 0.0, c ** (2.0 * H), scale) / (2.0 * H)
    return _checked_quad(
        lambda v: f(v * v) * 2.0 * v ** (4.0 * H - 1.0), 0.0, math.sqrt(c), scale
    )


def _require_stationary(parts: ModelParts):
    if not parts.stationary:
        raise DomainError("operation requires a stationary model")


def acf_integral_form(model: CarfimaModel, h: float, parts: ModelParts | None = None) -> float:
    """Autocovariance at lag h from the three-integral matrix form.

    Works for any 0 < H < 1 and does not need distinct eigenvalues; each
    integral is evaluated with the matrix exponential folded in so the
    integrands stay bounded.
    """
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    parts = parts or prepare(model)
    _require_stationary(parts)
    H = model.H
    A = parts.sys.A
    V = vstar(parts.sys, model).Vstar
    bA = parts.sys.beta_vec @ A
    Vb = V @ parts.sys.beta_vec

    def phi(s):
        return bA @ expm(A * s) @ Vb

    scale = abs(float(parts.sys.beta_vec @ V @ parts.sys.beta_vec))
    U = _decay_horizon(A, rtol=1e-15, weight_exp=max(2 * H - 1, 0.0))
    i1 = _int_power_weight(lambda u: phi(h - u), h, H, scale)
    if h > 0:
        i2 = _checked_quad(lambda w: phi(w) * (w + h) ** (2 * H - 1), 0.0, U, scale)
    else:
        i2 = _int_power_weight(phi, U, H, scale)
    i3 = _int_power_weight(lambda u: phi(u + h), U, H, scale)
    return H * (i1 - i2 - i3)


def _eigen_coeffs(model: CarfimaModel, es) -> np.ndarray:
    """Weights beta(l) beta(-l) / (alpha'(l) alpha(-l)) per eigenvalue."""
    out = np.empty(len(es.lambdas), dtype=complex)
    for i, lam in enumerate(es.lambdas):
        _, a1, b_pos = char_poly_eval(model, lam)
        a_neg, _, b_neg = char_poly_eval(model, -lam)
        out[i] = b_pos * b_neg / (a1 * a_neg)
    return out


def acf_closed_form(model: CarfimaModel, h: float, parts: ModelParts | None = None) -> float:
    """Autocovariance at lag h from the closed eigen-expansion.

    Requires distinct eigenvalues; the conjugate-pair structure makes the
    complex sum real, and a residual imaginary part above
    1e-8 (|value| + sigma^2) is treated as a branch-selection bug.
    """
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    parts = parts or prepare(model)
    _require_stationary(parts)
    if not parts.es.distinct:
        raise RepeatedEigenvaluesError(
            "eigenvalues too close for the closed form; use acf_integral_form"
        )
    H = model.H
    coeffs = _eigen_coeffs(model, parts.es)
    total = 0j
    for lam, c in zip(parts.es.lambdas, coeffs):
        total += c * u_kernel(H, lam, h)
    total *= 0.5 * model.sigma**2 * gamma_fn(2 * H + 1)
    if abs(total.imag) > 1e-8 * (abs(total) + model.sigma**2):
        raise CarfimaError(
            f"eigen-expansion returned imaginary residue {total.imag:.3e} at h={h}"
        )
    return float(total.real)


def acf_carma(model: CarfimaModel, h: float, parts: ModelParts | None = None) -> float:
    """Autocovariance at lag h for the H = 1/2 (CARMA) case.

    Both the matrix form beta' e^{Ah} V* beta and, when the eigenvalues are
    distinct, the eigen-sum are computed; they must agree to 1e-9 relative.
    The matrix form is returned.
    """
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    if model.H != 0.5:
        raise DomainError("acf_carma requires H = 1/2 exactly")
    parts = parts or prepare(model)
    _require_stationary(parts)
    V = vstar(parts.sys, model).Vstar
    b = parts.sys.beta_vec
    mat_form = float(b @ expm(parts.sys.A * h) @ V @ b)
    if parts.es.distinct:
        coeffs = _eigen_coeffs(model, parts.es)
        eig_form = model.sigma**2 * np.sum(coeffs * np.exp(parts.es.lambdas * h))
        scale = max(abs(mat_form), abs(eig_form), 1e-12 * float(b @ V @ b))
        if abs(mat_form - eig_form) > 1e-9 * scale:
            raise CarfimaError(
                f"CARMA matrix and eigen forms disagree at h={h}: "
                f"{mat_form!r} vs {eig_form!r}"
            )
    return mat_form


def acf_tail_asymptote(model: CarfimaModel, h: float) -> float:
    """Large-lag power law sigma^2 H (2H-1) h^{2H-2} / alpha_1^2."""
    if model.H == 0.5:
        raise DomainError("the tail asymptote is defined for H != 1/2")
    if h <= 0:
        raise DomainError(f"h must be > 0, got {h}")
    H = model.H
    return model.sigma**2 * H * (2 * H - 1) * h ** (2 * H - 2) / model.alpha[1] ** 2


def cov_y0_fbm(model: CarfimaModel, t: float, parts: ModelParts | None = None) -> float:
    """Covariance between the stationary Y_0 and the driving fBm at time t.

    Only exposed for alpha_0 = 0, matching the two-sided stationary
    construction the formula is derived from.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if model.alpha[0] != 0.0:
        raise DomainError("cov_y0_fbm requires alpha_0 = 0")
    parts = parts or prepare(model)
    _require_stationary(parts)
    H = model.H
    A = parts.sys.A
    b = parts.sys.beta_vec
    dp = parts.sys.delta_p

    def psi(u):
        return b @ expm(A * u) @ dp

    scale = model.sigma
    U = _decay_horizon(A, rtol=1e-15, weight_exp=max(2 * H - 1, 0.0))
    shifted = _checked_quad(lambda u: psi(u) * (u + t) ** (2 * H - 1), 0.0, U, scale) \
        if t > 0 else _int_power_weight(psi, U, H, scale)
    plain = _int_power_weight(psi, U, H, scale)
    return H * model.sigma * (shifted - plain)


def autocovariance(
    model: CarfimaModel,
    lags,
    method: str = "auto",
    parts: ModelParts | None = None,
) -> AcfTable:
    """Autocovariance table on a lag grid, dispatching between routes.

    method="auto" uses the CARMA route inside |H - 1/2| < 1e-6 (warning
    when H is merely close to 1/2), the closed form for distinct
    eigenvalues, and quadrature otherwise.
    """
    parts = parts or prepare(model)
    _require_stationary(parts)
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    if method == "auto":
        if abs(model.H - 0.5) < CARMA_DISPATCH_BAND:
            if model.H != 0.5:
                warnings.warn(
                    "H within 1e-6 of 1/2: using the exact CARMA route at H=1/2 "
                    "(the fractional kernel loses precision there)",
                    stacklevel=2,
                )
                model = CarfimaModel(p=model.p, q=model.q, alpha=model.alpha,
                                     beta=model.beta, H=0.5, sigma=model.sigma)
                parts = prepare(model)
            method = "carma_exact"
        elif parts.es.distinct:
            method = "closed_form"
        else:
            warnings.warn("repeated eigenvalues: falling back to quadrature", stacklevel=2)
            method = "quadrature"
    if method == "closed_form":
        values = [acf_closed_form(model, h, parts) for h in lags]
    elif method == "quadrature":
        values = [acf_integral_form(model, h, parts) for h in lags]
    elif method == "carma_exact":
        values = [acf_carma(model, h, parts) for h in lags]
    else:
        raise DomainError(f"unknown acf method {method!r}")
    return AcfTable(lags=lags, values=np.array(values), method=method,
                    model_hash=model.model_hash())
