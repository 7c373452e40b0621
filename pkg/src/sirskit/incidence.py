"""Incidence functions f(S, I) and their structural hypotheses.

An incidence function gives the rate of new infections as a function of
the susceptible and infected population sizes.  The toolkit works with
functions that factor through the number of infectives,

    f(S, I) = I * f1(S, I),

and checks three structural hypotheses on them:

    (H1) f(S, I) = I * f1(S, I) with f(0, I) = f(S, 0) = 0;
    (H2) f1 is strictly increasing in S and non-increasing in I;
    (H3) f(S, I) / I has a positive limit as I -> 0+ for every S > 0.

f1 at I = 0 always means the continuous extension, which coincides with
the partial derivative of f with respect to I along the S axis.  The
built-in families implement that extension analytically; user-supplied
functions fall back on Richardson extrapolation of f(S, I)/I.

Evaluation callables are expected to accept either Python floats or
numpy arrays (all built-ins do); grid scans rely on this.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import EvaluationError, HypothesisViolationError, LimitConvergenceError

# Strictness threshold for sign checks; values this close to zero are
# treated as zero to avoid floating-point false positives.
_ZERO_TOL = 1e-12

# Relative agreement required between successive Richardson extrapolants.
_LIMIT_RTOL = 1e-6

_FD_STEP = 1e-5


@dataclass(frozen=True)
class IncidenceFunction:
    """An incidence rate f(S, I) together with its factor f1 = f / I.

    ``partials``, when present, holds analytic callables for df1/dS and
    df1/dI; otherwise central finite differences (step 1e-5) are used.
    Instances are immutable and safe to share between threads.
    """

    eval_f: Callable
    eval_f1: Callable
    partials: tuple[Callable, Callable] | None
    label: str

    def f1_ds(self, S, I):
        """Partial derivative of f1 with respect to S."""
        if self.partials is not None:
            return self.partials[0](S, I)
        return (self.eval_f1(S + _FD_STEP, I) - self.eval_f1(S - _FD_STEP, I)) / (2 * _FD_STEP)

    def f1_di(self, S, I):
        """Partial derivative of f1 with respect to I."""
        if self.partials is not None:
            return self.partials[1](S, I)
        return (self.eval_f1(S, I + _FD_STEP) - self.eval_f1(S, I - _FD_STEP)) / (2 * _FD_STEP)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of checking (H1)-(H3) on a sample grid.

    ``violations`` holds one entry per failing sample as a tuple of
    (hypothesis id, sample point, observed value); it is empty exactly
    when all three pass flags are true.  ``h3_limit_at`` records the
    extrapolated small-I limit of f/I at every sampled S > 0.
    """

    h1_pass: bool
    h2_pass: bool
    h3_pass: bool
    h3_limit_at: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    grid: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return self.h1_pass and self.h2_pass and self.h3_pass

    def as_dict(self) -> dict:
        return {
            "h1_pass": self.h1_pass,
            "h2_pass": self.h2_pass,
            "h3_pass": self.h3_pass,
            "h3_limit_at": [[float(s), float(v)] for s, v in self.h3_limit_at],
            "violations": [
                {"hypothesis": hyp, "point": [float(p[0]), float(p[1])], "value": float(v)}
                for hyp, p, v in self.violations
            ],
            "grid": self.grid,
        }


def _builtin_bilinear(c):
    beta = c["beta"]
    return IncidenceFunction(
        eval_f=lambda S, I: beta * S * I,
        eval_f1=lambda S, I: beta * S + 0.0 * I,
        partials=(lambda S, I: beta + 0.0 * S + 0.0 * I, lambda S, I: 0.0 * S + 0.0 * I),
        label=f"bilinear(beta={beta:g})",
    )


def _builtin_power(c):
    k, q = c["k"], c["q"]
    return IncidenceFunction(
        eval_f=lambda S, I: k * I * S ** q,
        eval_f1=lambda S, I: k * S ** q + 0.0 * I,
        partials=(lambda S, I: k * q * S ** (q - 1.0) + 0.0 * I, lambda S, I: 0.0 * S + 0.0 * I),
        label=f"power(k={k:g}, q={q:g})",
    )


def _builtin_saturated_in_i(c):
    beta, a = c["beta"], c["a"]
    return IncidenceFunction(
        eval_f=lambda S, I: beta * S * I / (1.0 + a * I),
        eval_f1=lambda S, I: beta * S / (1.0 + a * I),
        partials=(
            lambda S, I: beta / (1.0 + a * I) + 0.0 * S,
            lambda S, I: -a * beta * S / (1.0 + a * I) ** 2,
        ),
        label=f"saturated_in_I(beta={beta:g}, a={a:g})",
    )


def _builtin_psi_ratio(c):
    beta, a, b = c["beta"], c["a"], c["b"]

    def psi(I):
        return 1.0 + a * I + b * I * I

    return IncidenceFunction(
        eval_f=lambda S, I: beta * S * I / psi(I),
        eval_f1=lambda S, I: beta * S / psi(I),
        partials=(
            lambda S, I: beta / psi(I) + 0.0 * S,
            lambda S, I: -beta * S * (a + 2.0 * b * I) / psi(I) ** 2,
        ),
        label=f"psi_ratio(beta={beta:g}, a={a:g}, b={b:g})",
    )


def _builtin_ruan(c):
    beta, rho = c["beta"], c["rho"]
    return IncidenceFunction(
        eval_f=lambda S, I: beta * S * I * I / (1.0 + rho * I * I),
        eval_f1=lambda S, I: beta * S * I / (1.0 + rho * I * I),
        partials=(
            lambda S, I: beta * I / (1.0 + rho * I * I),
            lambda S, I: beta * S * (1.0 - rho * I * I) / (1.0 + rho * I * I) ** 2,
        ),
        label=f"ruan(beta={beta:g}, rho={rho:g})",
    )


# family -> (constructor, positive coefficients, non-negative coefficients with default 0)
_FAMILIES = {
    "bilinear": (_builtin_bilinear, ("beta",), ()),
    "power": (_builtin_power, ("k", "q"), ()),
    "saturated_in_I": (_builtin_saturated_in_i, ("beta",), ("a",)),
    "psi_ratio": (_builtin_psi_ratio, ("beta",), ("a", "b")),
    "ruan": (_builtin_ruan, ("beta",), ("rho",)),
}


def make_builtin(family: str, coefficients: Mapping[str, float]) -> IncidenceFunction:
    """Build one of the built-in incidence families.

    Families and coefficients:

    ==============  =================================  =========================
    family          f(S, I)                             coefficients
    ==============  =================================  =========================
    bilinear        beta*S*I                            beta > 0
    power           k*I*S**q                            k > 0, q > 0
    saturated_in_I  beta*S*I / (1 + a*I)                beta > 0, a >= 0
    psi_ratio       beta*S*I / (1 + a*I + b*I**2)       beta > 0, a, b >= 0
    ruan            beta*S*I**2 / (1 + rho*I**2)        beta > 0, rho >= 0
    ==============  =================================  =========================

    Non-negative coefficients may be omitted and default to 0.  All
    built-ins carry exact analytic partials of f1.
    """
    if family not in _FAMILIES:
        raise ValueError(f"unknown incidence family {family!r}; "
                         f"expected one of {sorted(_FAMILIES)}")
    ctor, positive, nonneg = _FAMILIES[family]
    known = set(positive) | set(nonneg)
    unknown = set(coefficients) - known
    if unknown:
        raise ValueError(f"{family}: unknown coefficient(s) {sorted(unknown)}; "
                         f"expected {sorted(known)}")
    coefs = {}
    for name in positive:
        if name not in coefficients:
            raise ValueError(f"{family}: missing required coefficient {name!r}")
        value = float(coefficients[name])
        if not np.isfinite(value) or value <= 0:
            raise ValueError(f"{family}: coefficient {name} must be positive, got {value}")
        coefs[name] = value
    for name in nonneg:
        value = float(coefficients.get(name, 0.0))
        if not np.isfinite(value) or value < 0:
            raise ValueError(f"{family}: coefficient {name} must be non-negative, got {value}")
        coefs[name] = value
    return ctor(coefs)


def from_callables(f: Callable, f1: Callable | None = None,
                   partials: tuple[Callable, Callable] | None = None,
                   label: str = "user") -> IncidenceFunction:
    """Wrap user-supplied callables as an IncidenceFunction.

    When ``f1`` is omitted it is derived as f(S, I)/I, with the value at
    I = 0 filled in by the extrapolated small-I limit.
    """
    return IncidenceFunction(eval_f=f, eval_f1=f1 if f1 is not None else _ratio_f1(f),
                             partials=partials, label=label)


def _ratio_f1(f):
    def f1(S, I):
        s_arr = np.asarray(S, dtype=float)
        i_arr = np.asarray(I, dtype=float)
        s_b, i_b = np.broadcast_arrays(s_arr, i_arr)
        out = np.empty(s_b.shape, dtype=float)
        flat_out = out.reshape(-1)
        flat_s = np.ravel(s_b)
        flat_i = np.ravel(i_b)
        for n in range(flat_out.size):
            i_val = float(flat_i[n])
            if i_val > 0.0:
                flat_out[n] = f(float(flat_s[n]), i_val) / i_val
            else:
                limit, _ = small_i_limit(f, float(flat_s[n]))
                flat_out[n] = limit
        if out.shape == ():
            return float(out)
        return out

    return f1


def small_i_limit(f_eval: Callable, S: float, eps: float = 1e-4):
    """Richardson-extrapolated limit of f(S, I)/I as I -> 0+.

    Evaluates the ratio at eps, eps/2 and eps/4 and extrapolates twice.
    Returns (limit, converged) where ``converged`` means the two
    first-level extrapolants agree to 1e-6 relative.
    """
    v0 = f_eval(S, eps) / eps
    v1 = f_eval(S, eps / 2.0) / (eps / 2.0)
    v2 = f_eval(S, eps / 4.0) / (eps / 4.0)
    r1 = 2.0 * v1 - v0
    r2 = 2.0 * v2 - v1
    limit = (4.0 * r2 - r1) / 3.0
    scale = max(abs(r1), abs(r2), _ZERO_TOL)
    converged = abs(r2 - r1) <= _LIMIT_RTOL * scale
    return float(limit), bool(converged)


def _require_finite(values, points, what):
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values)
    if np.any(bad):
        first = int(np.flatnonzero(bad.ravel())[0])
        pt = points[first]
        raise EvaluationError(f"{what} is non-finite at (S, I) = ({pt[0]:g}, {pt[1]:g})")
    return values


def check_hypotheses(f: IncidenceFunction, s_max: float,
                     grid_n: int = 64, eps: float = 1e-4) -> HypothesisReport:
    """Check (H1)-(H3) for ``f`` on a grid over [0, s_max]^2.

    (H1) is tested on boundary samples, (H2) sign conditions on the
    interior grid only (the boundary S = 0 is degenerate there since
    f(0, I) = 0 forces f1(0, I) = 0), and (H3) by extrapolating
    f(S, I)/I from I in {eps, eps/2, eps/4} at every sampled S > 0.
    Deterministic: identical inputs yield identical reports.
    """
    if not (s_max > 0):
        raise ValueError(f"s_max must be positive, got {s_max}")
    if grid_n < 8:
        raise ValueError(f"grid_n must be at least 8, got {grid_n}")
    if not (0 < eps < s_max):
        raise ValueError(f"eps must lie in (0, s_max), got {eps}")

    axis = np.linspace(0.0, s_max, grid_n)
    violations = []

    # (H1): boundary identities.
    on_s_axis = _require_finite(f.eval_f(axis, 0.0 * axis),
                                [(s, 0.0) for s in axis], "f(S, 0)")
    for s, val in zip(axis, on_s_axis):
        if abs(val) > _ZERO_TOL:
            violations.append(("H1", (float(s), 0.0), float(val)))
    on_i_axis = _require_finite(f.eval_f(0.0 * axis, axis),
                                [(0.0, i) for i in axis], "f(0, I)")
    for i, val in zip(axis, on_i_axis):
        if abs(val) > _ZERO_TOL:
            violations.append(("H1", (0.0, float(i)), float(val)))

    # (H2): strict monotonicity in S, non-increase in I, interior only.
    interior = axis[1:-1]
    su, iv = np.meshgrid(interior, interior, indexing="ij")
    pts = list(zip(su.ravel(), iv.ravel()))
    ds = _require_finite(f.f1_ds(su, iv), pts, "df1/dS")
    di = _require_finite(f.f1_di(su, iv), pts, "df1/dI")
    for (s, i), v in zip(pts, np.ravel(ds)):
        if v <= _ZERO_TOL:
            violations.append(("H2", (float(s), float(i)), float(v)))
    for (s, i), v in zip(pts, np.ravel(di)):
        if v > _ZERO_TOL:
            violations.append(("H2", (float(s), float(i)), float(v)))

    # (H3): positive, Cauchy-convergent small-I limit at every S > 0.
    h3_limit_at = []
    for s in axis[axis > 0]:
        limit, converged = small_i_limit(f.eval_f, float(s), eps)
        if not np.isfinite(limit):
            raise EvaluationError(f"f(S, I)/I is non-finite near (S, I) = ({s:g}, 0)")
        h3_limit_at.append((float(s), limit))
        if not (converged and limit > _ZERO_TOL):
            violations.append(("H3", (float(s), 0.0), limit))

    failed = {hyp for hyp, _, _ in violations}
    return HypothesisReport(
        h1_pass="H1" not in failed,
        h2_pass="H2" not in failed,
        h3_pass="H3" not in failed,
        h3_limit_at=h3_limit_at,
        violations=violations,
        grid={"s_max": float(s_max), "grid_n": int(grid_n), "eps": float(eps),
              "axis": [float(a) for a in axis]},
    )


def compute_beta(f: IncidenceFunction, Lambda: float, mu: float,
                 eps: float = 1e-4) -> float:
    """Effective transmission coefficient (mu/Lambda) * df/dI at (S0, 0).

    S0 = Lambda/mu.  Uses the analytic continuous extension f1(S0, 0)
    when the function carries analytic partials, otherwise Richardson
    extrapolation of f(S0, I)/I toward I = 0+.
    """
    if not (Lambda > 0 and mu > 0):
        raise ValueError("Lambda and mu must be positive")
    s0 = Lambda / mu
    if f.partials is not None:
        slope = float(f.eval_f1(s0, 0.0))
    else:
        slope, converged = small_i_limit(f.eval_f, s0, eps)
        if slope <= _ZERO_TOL:
            raise HypothesisViolationError(
                f"limit of f(S0, I)/I at S0 = {s0:g} is {slope:g}, not positive; (H3) fails")
        if not converged:
            raise LimitConvergenceError(
                f"small-I extrapolation of f(S0, I)/I did not converge at S0 = {s0:g}")
    if slope <= 0:
        raise HypothesisViolationError(
            f"df/dI at (S0, 0) is {slope:g}, not positive; (H3) fails at S0 = {s0:g}")
    return (mu / Lambda) * slope


def check_incidence_bound(f: IncidenceFunction, Lambda: float, mu: float,
                          grid_n: int = 128):
    """Verify f(S, I) <= (Lambda/mu) * beta * I on a grid over [0, S0]^2.

    Returns (passed, min_slack) where slack is the pointwise margin
    (Lambda/mu)*beta*I - f(S, I); the bound passes when the minimum
    slack is above -1e-12.  For f1 independent of I the bound is tight
    along S = S0.
    """
    beta = compute_beta(f, Lambda, mu)
    s0 = Lambda / mu
    axis = np.linspace(0.0, s0, grid_n)
    su, iv = np.meshgrid(axis, axis, indexing="ij")
    fv = _require_finite(f.eval_f(su, iv), list(zip(su.ravel(), iv.ravel())), "f(S, I)")
    slack = s0 * beta * iv - fv
    return bool(slack.min() >= -1e-12), float(slack.min())
