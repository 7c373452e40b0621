"""Numerical global-stability certificates for both equilibria.

For the disease-free equilibrium the bound

    dI/dt <= (mu + gamma1 + gamma2 + alpha) * (R0 - 1) * I

is verified on a grid over the feasible region, which makes I a strict
Lyapunov-style decrease witness whenever R0 < 1.

For an endemic equilibrium E1 = (S*, I*, R*) the certificate uses the
function

    V(S, I, R) = (1/2)(S - S* + I - I* + R - R*)^2
                 + k1*(I - I* - I* * ln(I/I*))
                 + (k2/2)(R - R*)^2

whose derivative along trajectories is -w^T Q w - v^T P v with
w = (S - S*, I - I*), v = (S - S*, R - R*) and

    P = [[mu/2, mu], [mu, mu + k2*(mu+delta)]],
    Q = [[mu/2, (2mu + alpha - k1*G)/2], [(2mu + alpha - k1*G)/2, mu + alpha]],

where G(u, v) = (f1(u, v) - f1(S*, I*)) / (u - S*) is the secant slope
of the incidence factor.  Both matrices are positive definite when two
conditions hold:

    (a1)  (2mu + alpha)(mu + delta) > mu*gamma2, and
    (a2)  some k1 > 0 keeps h(u, v) = (2mu + alpha - k1*G(u, v))^2
          below 2mu*(mu + alpha) for all u != S* in [0, Lambda/mu].

k2 = (2mu + alpha)/gamma2 cancels the (I - I*)(R - R*) cross term and is
the default whenever gamma2 > 0.

Certificates here are grid-based confirmation, not interval proofs: a
pass means "verified at the reported grid resolution, with refinement
toward u = S* to detect an unbounded secant slope".  When f1 genuinely
depends on I the slope G blows up near u = S* and no k1 can exist; the
scan surfaces that through ``divergence_flag``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateParameterError, EvaluationError, SingularPointError
from .incidence import IncidenceFunction
from .model import ModelParams, State, r0

_SINGULAR_TOL = 1e-12


class A1Check(NamedTuple):
    passed: bool
    margin: float
    remark_value: float


@dataclass(frozen=True)
class A2Scan:
    """Result of scanning h(u, v) over [0, Lambda/mu]^2."""

    sup_h: float
    h_bound: float
    passed: bool
    divergence_flag: bool
    worst_point: tuple[float, float]


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of the endemic-stability certificate checks.

    Minor pairs hold the leading principal minors (top-left entry,
    determinant); ``q_minors`` is evaluated at the sample where h is
    largest.  ``dvdt_max`` is the largest sampled derivative of V
    outside a ball around the equilibrium and is negative whenever the
    certificate is sound.
    """

    a1_pass: bool
    a1_margin: float
    a1_remark_value: float
    k1: float | None
    k2: float | None
    sup_h: float
    h_bound: float
    divergence_flag: bool
    p_minors: tuple[float, float] | None
    q_minors: tuple[float, float] | None
    dvdt_max: float | None
    grid_n: int
    exclusion: float

    @property
    def granted(self) -> bool:
        return (self.a1_pass and self.k1 is not None
                and self.sup_h < self.h_bound and not self.divergence_flag)

    def as_dict(self) -> dict:
        return {
            "granted": self.granted,
            "a1_pass": self.a1_pass,
            "a1_margin": self.a1_margin,
            "a1_remark_value": self.a1_remark_value,
            "k1": self.k1,
            "k2": self.k2,
            "sup_h": self.sup_h,
            "h_bound": self.h_bound,
            "divergence_flag": self.divergence_flag,
            "p_minors": list(self.p_minors) if self.p_minors is not None else None,
            "q_minors": list(self.q_minors) if self.q_minors is not None else None,
            "dvdt_max": self.dvdt_max,
            "grid_n": self.grid_n,
            "exclusion": self.exclusion,
        }


def check_a1(p: ModelParams) -> A1Check:
    """Check (2mu+alpha)(mu+delta) > mu*gamma2.

    Returns the margin of that inequality together with its expanded
    form 2mu^2 + (alpha + 2delta - gamma2)*mu + alpha*delta; the two are
    algebraically identical, so their signs always agree.
    """
    margin = (2.0 * p.mu + p.alpha) * (p.mu + p.delta) - p.mu * p.gamma2
    remark = (2.0 * p.mu * p.mu
              + (p.alpha + 2.0 * p.delta - p.gamma2) * p.mu
              + p.alpha * p.delta)
    return A1Check(passed=margin > 0, margin=float(margin), remark_value=float(remark))


def secant_slope(f: IncidenceFunction, eq: State, u: float, v: float) -> float:
    """(f1(u, v) - f1(S*, I*)) / (u - S*), the slope G of the certificate.

    v = 0 uses the continuous extension of f1.  Raises
    SingularPointError when u is within 1e-12 of S*.
    """
    if abs(u - eq.S) < _SINGULAR_TOL:
        raise SingularPointError(f"secant slope undefined at u = S* = {eq.S:g}")
    f1_star = float(f.eval_f1(eq.S, eq.I))
    return (float(f.eval_f1(u, v)) - f1_star) / (u - eq.S)


@dataclass(frozen=True)
class _SlopeGrid:
    """Secant slopes sampled over the scan region, singular column excluded."""

    g: np.ndarray
    u: np.ndarray
    v: np.ndarray
    divergence_flag: bool


def _slope_grid(f: IncidenceFunction, eq: State, s0: float,
                grid_n: int, exclusion: float) -> _SlopeGrid:
    axis = np.linspace(0.0, s0, grid_n)
    f1_star = float(f.eval_f1(eq.S, eq.I))

    uu, vv = np.meshgrid(axis, axis, indexing="ij")
    keep = np.abs(uu - eq.S) >= exclusion
    u_flat, v_flat = uu[keep], vv[keep]
    g_flat = (np.asarray(f.eval_f1(u_flat, v_flat), dtype=float) - f1_star) / (u_flat - eq.S)

    # Refine toward u = S* on shrinking offsets to detect growth of |G|;
    # removable singularities stay bounded, genuine ones grow ~1/offset.
    offsets = (exclusion, exclusion / 4.0, exclusion / 16.0)
    divergence = False
    ref_u, ref_v, ref_g = [], [], []
    for side in (1.0, -1.0):
        per_offset = []
        for off in offsets:
            u_val = eq.S + side * off
            if not (0.0 <= u_val <= s0):
                per_offset = []
                break
            g_col = (np.asarray(f.eval_f1(u_val + 0.0 * axis, axis), dtype=float)
                     - f1_star) / (u_val - eq.S)
            per_offset.append(g_col)
            ref_u.append(np.full_like(axis, u_val))
            ref_v.append(axis)
            ref_g.append(g_col)
        if per_offset:
            near, far = np.abs(per_offset[-1]), np.abs(per_offset[0])
            if np.any(near > 10.0 * np.maximum(far, _SINGULAR_TOL)):
                divergence = True

    if ref_g:
        u_flat = np.concatenate([u_flat] + ref_u)
        v_flat = np.concatenate([v_flat] + ref_v)
        g_flat = np.concatenate([g_flat] + ref_g)

    if not np.all(np.isfinite(g_flat)):
        bad = int(np.flatnonzero(~np.isfinite(g_flat))[0])
        raise EvaluationError(
            f"secant slope non-finite at (u, v) = ({u_flat[bad]:g}, {v_flat[bad]:g})")
    return _SlopeGrid(g=g_flat, u=u_flat, v=v_flat, divergence_flag=divergence)


def check_a2(p: ModelParams, f: IncidenceFunction, eq: State, k1: float,
             grid_n: int = 201, exclusion: float | None = None) -> A2Scan:
    """Scan h(u, v) = (2mu + alpha - k1*G(u, v))^2 against 2mu*(mu+alpha).

    Evaluates h on a grid_n x grid_n grid over [0, Lambda/mu]^2 with the
    strip |u - S*| < exclusion removed, plus refinement spokes at
    offsets exclusion/{1, 4, 16} from S*.  Passes when the supremum
    stays below the bound and |G| shows no divergent growth toward S*.
    """
    if k1 < 0:
        raise ValueError(f"k1 must be non-negative, got {k1}")
    if exclusion is None:
        exclusion = 1e-4 * p.s0
    grid = _slope_grid(f, eq, p.s0, grid_n, exclusion)
    c = 2.0 * p.mu + p.alpha
    h = (c - k1 * grid.g) ** 2
    worst = int(np.argmax(h))
    sup_h = float(h[worst])
    bound = 2.0 * p.mu * (p.mu + p.alpha)
    return A2Scan(
        sup_h=sup_h,
        h_bound=bound,
        passed=sup_h < bound and not grid.divergence_flag,
        divergence_flag=grid.divergence_flag,
        worst_point=(float(grid.u[worst]), float(grid.v[worst])),
    )


def find_k1(p: ModelParams, f: IncidenceFunction, eq: State,
            grid_n: int = 201, exclusion: float | None = None) -> float | None:
    """Search for a constant k1 satisfying the coupling bound, or None.

    Minimises sup h over k1 in [1e-6, k_max] by golden-section search,
    where k_max = 2(2mu+alpha)/max|G| (beyond it the bracketed term
    changes sign everywhere and h only grows).  sup h is a maximum of
    parabolas in k1, hence convex, so the search is exact.  Absence of a
    valid k1 is a value, not an error.
    """
    if exclusion is None:
        exclusion = 1e-4 * p.s0
    grid = _slope_grid(f, eq, p.s0, grid_n, exclusion)
    c = 2.0 * p.mu + p.alpha
    bound = 2.0 * p.mu * (p.mu + p.alpha)
    g_max = float(np.max(np.abs(grid.g)))
    if g_max <= 0.0:
        return None  # h == c^2 >= bound for every k1

    def sup_h(k1):
        return float(np.max((c - k1 * grid.g) ** 2))

    lo, hi = 1e-6, 2.0 * c / g_max
    if hi <= lo:
        return None
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1_val, f2_val = sup_h(x1), sup_h(x2)
    for _ in range(200):
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
        if f1_val <= f2_val:
            hi, x2, f2_val = x2, x1, f1_val
            x1 = hi - invphi * (hi - lo)
            f1_val = sup_h(x1)
        else:
            lo, x1, f1_val = x1, x2, f2_val
            x2 = lo + invphi * (hi - lo)
            f2_val = sup_h(x2)
    best = 0.5 * (lo + hi)
    if sup_h(best) < bound and not grid.divergence_flag:
        return float(best)
    return None


def default_k2(p: ModelParams) -> float:
    """(2mu + alpha)/gamma2, the choice cancelling the I-R cross term."""
    if p.gamma2 == 0:
        raise DegenerateParameterError(
            "gamma2 = 0 leaves the default k2 undefined; pass k2 explicitly")
    return (2.0 * p.mu + p.alpha) / p.gamma2


def lyapunov_v(eq: State, k1: float, k2: float, x: State) -> float:
    """The certificate function V at ``x``; zero exactly at the equilibrium."""
    if x.I <= 0:
        raise ValueError(f"V requires I > 0, got I = {x.I}")
    if not (k1 > 0 and k2 > 0):
        raise ValueError("k1 and k2 must be positive")
    shift = (x.S - eq.S) + (x.I - eq.I) + (x.R - eq.R)
    log_term = x.I - eq.I - eq.I * math.log(x.I / eq.I)
    return 0.5 * shift * shift + k1 * log_term + 0.5 * k2 * (x.R - eq.R) ** 2


def dvdt_at(p: ModelParams, f: IncidenceFunction, eq: State,
            k1: float, k2: float, x: State) -> float:
    """Derivative of V along the flow at a single state (analytic gradient)."""
    if x.I <= 0:
        raise ValueError(f"dV/dt requires I > 0, got I = {x.I}")
    fv = float(f.eval_f(x.S, x.I))
    ds = p.Lambda - p.mu * x.S - fv + p.gamma1 * x.I + p.delta * x.R
    di = fv - p.infected_outflow * x.I
    dr = p.gamma2 * x.I - (p.mu + p.delta) * x.R
    shift = (x.S - eq.S) + (x.I - eq.I) + (x.R - eq.R)
    return (shift * (ds + di + dr)
            + k1 * (1.0 - eq.I / x.I) * di
            + k2 * (x.R - eq.R) * dr)


def dvdt_scan(p: ModelParams, f: IncidenceFunction, eq: State, k1: float,
              k2: float | None = None, grid_n: int = 41,
              ball: float | None = None) -> float:
    """Maximum of dV/dt over a grid on Omega excluding a ball around eq.

    The gradient of V is taken analytically; finite differences of V are
    only a cross-check in the test suite.  A sound certificate makes the
    returned maximum negative.
    """
    k2_value = default_k2(p) if k2 is None else k2
    s0 = p.s0
    ball_radius = 1e-3 * s0 if ball is None else ball
    axis = np.linspace(0.0, s0, grid_n)
    ss, ii, rr = np.meshgrid(axis, axis, axis, indexing="ij")
    keep = (ss + ii + rr <= s0 * (1.0 + 1e-12)) & (ii > 0)
    keep &= ((ss - eq.S) ** 2 + (ii - eq.I) ** 2 + (rr - eq.R) ** 2) > ball_radius ** 2
    ss, ii, rr = ss[keep], ii[keep], rr[keep]

    fv = np.asarray(f.eval_f(ss, ii), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise EvaluationError("incidence non-finite on the dV/dt scan grid")
    ds = p.Lambda - p.mu * ss - fv + p.gamma1 * ii + p.delta * rr
    di = fv - p.infected_outflow * ii
    dr = p.gamma2 * ii - (p.mu + p.delta) * rr
    shift = (ss - eq.S) + (ii - eq.I) + (rr - eq.R)
    dvdt = (shift * (ds + di + dr)
            + k1 * (1.0 - eq.I / ii) * di
            + k2_value * (rr - eq.R) * dr)
    return float(np.max(dvdt))


def pq_matrices(p: ModelParams, f: IncidenceFunction, eq: State,
                k1: float, k2: float, sample: tuple[float, float]):
    """The two quadratic-form matrices and their leading principal minors.

    Q depends on the sample (u, v) through the secant slope; P does not.
    Returns (P, Q, minors) with minors = (mu/2, det P, mu/2, det Q).
    """
    u, v = sample
    g = secant_slope(f, eq, u, v)
    off_q = 0.5 * (2.0 * p.mu + p.alpha - k1 * g)
    p_mat = np.array([[0.5 * p.mu, p.mu],
                      [p.mu, p.mu + k2 * (p.mu + p.delta)]])
    q_mat = np.array([[0.5 * p.mu, off_q],
                      [off_q, p.mu + p.alpha]])
    minors = (float(p_mat[0, 0]), float(np.linalg.det(p_mat)),
              float(q_mat[0, 0]), float(np.linalg.det(q_mat)))
    return p_mat, q_mat, minors


def dfe_lyapunov_bound(p: ModelParams, f: IncidenceFunction, grid_n: int = 201) -> float:
    """Worst gap of dI/dt <= infected_outflow * (R0 - 1) * I over Omega.

    Returns max over the grid of dI/dt minus the bound; the inequality
    holds (for any R0) when the result is at most 1e-10.  The gap
    reaches zero along S = S0 for f1 independent of I.
    """
    r0_value = r0(p, f)
    outflow = p.infected_outflow
    s0 = p.s0
    axis = np.linspace(0.0, s0, grid_n)
    ss, ii = np.meshgrid(axis, axis, indexing="ij")
    keep = ss + ii <= s0 * (1.0 + 1e-12)
    ss, ii = ss[keep], ii[keep]
    fv = np.asarray(f.eval_f(ss, ii), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise EvaluationError("incidence non-finite on the bound-check grid")
    gap = (fv - outflow * ii) - outflow * (r0_value - 1.0) * ii
    return float(np.max(gap))


def certify(p: ModelParams, f: IncidenceFunction, eq: State,
            k1: float | None = None, k2: float | None = None,
            grid_n: int = 201, exclusion: float | None = None,
            dvdt_grid_n: int = 41, ball: float | None = None) -> CertificateReport:
    """Run the full endemic-certificate pipeline and assemble a report.

    ``k1`` and ``k2`` override the search and the default cancellation
    choice respectively.  With gamma2 = 0 an explicit k2 is required.
    """
    if exclusion is None:
        exclusion = 1e-4 * p.s0
    a1 = check_a1(p)
    k2_value = k2 if k2 is not None else default_k2(p)
    k1_value = k1 if k1 is not None else find_k1(p, f, eq, grid_n, exclusion)

    if k1_value is None:
        scan = check_a2(p, f, eq, 0.0, grid_n, exclusion)
        return CertificateReport(
            a1_pass=a1.passed, a1_margin=a1.margin, a1_remark_value=a1.remark_value,
            k1=None, k2=k2_value, sup_h=scan.sup_h, h_bound=scan.h_bound,
            divergence_flag=scan.divergence_flag, p_minors=None, q_minors=None,
            dvdt_max=None, grid_n=grid_n, exclusion=exclusion)

    scan = check_a2(p, f, eq, k1_value, grid_n, exclusion)
    _, _, minors = pq_matrices(p, f, eq, k1_value, k2_value, scan.worst_point)
    dvdt_max = dvdt_scan(p, f, eq, k1_value, k2_value, dvdt_grid_n, ball)
    return CertificateReport(
        a1_pass=a1.passed, a1_margin=a1.margin, a1_remark_value=a1.remark_value,
        k1=float(k1_value), k2=float(k2_value),
        sup_h=scan.sup_h, h_bound=scan.h_bound,
        divergence_flag=scan.divergence_flag,
        p_minors=(minors[0], minors[1]), q_minors=(minors[2], minors[3]),
        dvdt_max=dvdt_max, grid_n=grid_n, exclusion=exclusion)
