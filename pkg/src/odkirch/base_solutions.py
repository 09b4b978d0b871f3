"""Base solution fields on balls and exterior domains, with their Lebesgue norms.

The ball problem is solved by U(x) = (|x - x0|^2 - R^2)/2: every k-Hessian of
it equals the constant C(N, k), it vanishes on the sphere of radius R and its
normal derivative there is R.  The exterior problem on the complement of the
closed unit ball is solved by U(x) = (|x|^(-N) - |x|^(2-N))/2, which satisfies
Delta U = N |x|^(-N-2), vanishes on |x| = 1 where |grad U| = 1, and decays at
infinity (stays bounded when N = 2).

Norms come in two deliberately independent flavours: closed forms assembled
from beta functions, and direct quadrature of |f|^p r^(N-1) (maximization for
the sup norm).  They share nothing but the profile definitions, so agreement
between them validates both.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .quadrature import integrate, integrate_decaying, maximize
from .specialfun import incomplete_beta, log_gamma, sphere_area

_INF = math.inf


@dataclass(frozen=True)
class BallGeometry:
    """Open ball of radius `radius` centred at `center` in R^n."""

    n: int
    radius: float
    center: tuple = ()

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise DomainError(f"dimension must be an integer >= 1, got {self.n}")
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise DomainError(f"radius must be finite and positive, got {self.radius}")
        center = tuple(float(c) for c in self.center) or (0.0,) * self.n
        if len(center) != self.n:
            raise DomainError(
                f"center has {len(center)} coordinates for dimension {self.n}"
            )
        object.__setattr__(self, "center", center)

    @property
    def x0(self) -> np.ndarray:
        return np.asarray(self.center)


@dataclass(frozen=True)
class ExteriorGeometry:
    """Complement of the closed unit ball in R^n, n >= 2."""

    n: int

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 2):
            raise DomainError(
                f"exterior geometry needs integer dimension >= 2, got {self.n}"
            )


@dataclass(frozen=True)
class RadialProfile:
    """A radial function r -> phi(r) with its first two derivatives.

    All three callables must accept scalars and numpy arrays alike.  The
    domain [r_min, r_max] is what `contains` reports; the callables themselves
    are not clipped, so evaluating a small step outside (as finite-difference
    stencils at the boundary do) is allowed.
    """

    phi: Callable
    dphi: Callable
    d2phi: Callable
    r_min: float
    r_max: float

    def contains(self, r) -> bool:
        slack = 1e-9 * (1.0 + abs(self.r_min))
        lo_ok = np.all(np.asarray(r) >= self.r_min - slack)
        if math.isinf(self.r_max):
            return bool(lo_ok)
        hi_ok = np.all(np.asarray(r) <= self.r_max + 1e-9 * (1.0 + self.r_max))
        return bool(lo_ok and hi_ok)

    def scale(self, a: float) -> "RadialProfile":
        return RadialProfile(
            phi=lambda r: a * self.phi(r),
            dphi=lambda r: a * self.dphi(r),
            d2phi=lambda r: a * self.d2phi(r),
            r_min=self.r_min,
            r_max=self.r_max,
        )

    def as_field(self, center=None) -> Callable:
        """Scalar field x -> phi(|x - center|)."""
        c = None if center is None else np.asarray(center, dtype=float)

        def u(x):
            x = np.asarray(x, dtype=float)
            d = x if c is None else x - c
            return self.phi(math.sqrt(float(d @ d)))

        return u

    def gradient_field(self, center=None) -> Callable:
        c = None if center is None else np.asarray(center, dtype=float)

        def grad(x):
            x = np.asarray(x, dtype=float)
            d = x if c is None else x - c
            r = math.sqrt(float(d @ d))
            if r == 0.0:
                return np.zeros_like(d) * self.dphi(0.0)
            return (self.dphi(r) / r) * d

        return grad


def ball_profile(geom: BallGeometry) -> RadialProfile:
    """Radial profile of the ball base solution: phi(r) = (r^2 - R^2)/2."""
    rsq = geom.radius ** 2
    return RadialProfile(
        phi=lambda r: 0.5 * (np.asarray(r, dtype=float) ** 2 - rsq),
        dphi=lambda r: np.asarray(r, dtype=float),
        d2phi=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        r_min=0.0,
        r_max=geom.radius,
    )


def exterior_profile(geom: ExteriorGeometry) -> RadialProfile:
    """Radial profile of the exterior base solution on [1, inf).

    phi(r) = (r^(-n) - r^(2-n))/2; for n = 2 the second term is the
    constant 1, so phi stays bounded instead of decaying.
    """
    n = geom.n

    def phi(r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (r ** (-n) - r ** (2.0 - n))

    def dphi(r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (-n * r ** (-n - 1.0) + (n - 2.0) * r ** (1.0 - n))

    def d2phi(r):
        r = np.asarray(r, dtype=float)
        return 0.5 * (n * (n + 1.0) * r ** (-n - 2.0)
                      - (n - 2.0) * (n - 1.0) * r ** (-n))

    return RadialProfile(phi=phi, dphi=dphi, d2phi=d2phi, r_min=1.0, r_max=_INF)


def _check_point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DomainError(f"expected a point in R^{n}, got shape {x.shape}")
    return x


def u_ball(x, geom: BallGeometry) -> float:
    """Ball base solution at a point of the closed ball."""
    x = _check_point(x, geom.n)
    d = x - geom.x0
    rsq = float(d @ d)
    if rsq > geom.radius ** 2 * (1.0 + 1e-12):
        raise DomainError(f"point at distance {math.sqrt(rsq)} outside ball "
                          f"of radius {geom.radius}")
    return 0.5 * (rsq - geom.radius ** 2)


def grad_u_ball(x, geom: BallGeometry) -> np.ndarray:
    x = _check_point(x, geom.n)
    d = x - geom.x0
    if float(d @ d) > geom.radius ** 2 * (1.0 + 1e-12):
        raise DomainError("point outside ball")
    return d


def u_exterior(x, geom: ExteriorGeometry) -> float:
    """Exterior base solution at a point with |x| >= 1."""
    x = _check_point(x, geom.n)
    r = float(np.linalg.norm(x))
    if r < 1.0 - 1e-12:
        raise DomainError(f"point at radius {r} inside the unit ball")
    return 0.5 * (r ** (-geom.n) - r ** (2.0 - geom.n))


def grad_u_exterior(x, geom: ExteriorGeometry) -> np.ndarray:
    x = _check_point(x, geom.n)
    n = geom.n
    r = float(np.linalg.norm(x))
    if r < 1.0 - 1e-12:
        raise DomainError(f"point at radius {r} inside the unit ball")
    dphi = 0.5 * (-n * r ** (-n - 1.0) + (n - 2.0) * r ** (1.0 - n))
    return (dphi / r) * x


def check_u_exponent(p: float, geom) -> None:
    """Raise DomainError unless the base solution lies in L^p of the geometry."""
    if p == _INF:
        return
    if not (p > 0.0):
        raise DomainError(f"norm exponent must be positive or inf, got {p}")
    if isinstance(geom, BallGeometry):
        return
    n = geom.n
    if n == 2:
        raise DomainError(
            "planar exterior solution is bounded but not decaying; "
            "only the sup norm is finite (use p = inf)"
        )
    if p <= n / (n - 2.0):
        raise DomainError(
            f"exterior solution in R^{n} is in L^p only for p > {n / (n - 2.0):g}, "
            f"got p = {p}"
        )


def check_gradient_exponent(q: float, geom) -> None:
    """Raise DomainError unless the base solution's gradient lies in L^q."""
    if q == _INF:
        return
    if not (q > 0.0):
        raise DomainError(f"norm exponent must be positive or inf, got {q}")
    if isinstance(geom, BallGeometry):
        return
    n = geom.n
    # The planar gradient decays like r^-3, faster than the generic r^(1-n).
    threshold = 2.0 / 3.0 if n == 2 else n / (n - 1.0)
    if q <= threshold:
        raise DomainError(
            f"exterior gradient in R^{n} is in L^q only for q > {threshold}, "
            f"got q = {q}"
        )


def _log_beta(x: float, y: float) -> float:
    return log_gamma(x) + log_gamma(y) - log_gamma(x + y)


def norm_u_ball(p: float, geom: BallGeometry) -> float:
    """||U||_p on the ball, closed form."""
    check_u_exponent(p, geom)
    n, radius = geom.n, geom.radius
    if p == _INF:
        return 0.5 * radius ** 2
    log_pow = (-(p + 1.0) * math.log(2.0)
               + math.log(sphere_area(n))
               + (2.0 * p + n) * math.log(radius)
               + _log_beta(0.5 * n, p + 1.0))
    return math.exp(log_pow / p)


def norm_grad_u_ball(q: float, geom: BallGeometry) -> float:
    """||grad U||_q on the ball, closed form."""
    check_gradient_exponent(q, geom)
    n, radius = geom.n, geom.radius
    if q == _INF:
        return radius
    log_pow = (math.log(sphere_area(n))
               + (q + n) * math.log(radius)
               - math.log(q + n))
    return math.exp(log_pow / q)


def norm_u_exterior(p: float, geom: ExteriorGeometry) -> float:
    """||U||_p on the exterior domain, closed form.

    The sup norm is attained at r = sqrt(n/(n-2)) for n >= 3, giving
    (1/(n-2)) (n/(n-2))^(-n/2); in the plane |U| increases to its limit 1/2.
    """
    check_u_exponent(p, geom)
    n = geom.n
    if p == _INF:
        if n == 2:
            return 0.5
        return (1.0 / (n - 2.0)) * (n / (n - 2.0)) ** (-0.5 * n)
    log_pow = (-(p + 1.0) * math.log(2.0)
               + math.log(sphere_area(n))
               + _log_beta(0.5 * (p * (n - 2.0) - n), p + 1.0))
    return math.exp(log_pow / p)


def norm_grad_u_exterior(q: float, geom: ExteriorGeometry) -> float:
    """||grad U||_q on the exterior domain, closed form.

    The sup norm equals 1, attained on the boundary sphere.  The finite-q
    value for n >= 3 splits at the interior zero of the gradient into an
    Euler beta plus an incomplete beta with negative second argument.
    """
    check_gradient_exponent(q, geom)
    n = geom.n
    if q == _INF:
        return 1.0
    if n == 2:
        return (2.0 * math.pi / (3.0 * q - 2.0)) ** (1.0 / q)
    log_pref = (-q * math.log(2.0)
                + math.log(sphere_area(n))
                + (q + 1.0) * math.log(n)
                - math.log(2.0 * (n - 2.0))
                + 0.5 * ((n - 2.0) - (n + 1.0) * q) * (math.log(n) - math.log(n - 2.0)))
    outer = math.exp(_log_beta(0.5 * ((n - 1.0) * q - n), q + 1.0))
    inner = incomplete_beta(2.0 / n, q + 1.0, 0.5 * (n - (n + 1.0) * q))
    return math.exp((log_pref + math.log(outer + inner)) / q)


def norm_quadrature(radial_f, p: float, n: int, r_lo: float, r_hi: float,
                    rel_tol: float = 1e-10) -> float:
    """L^p norm of a radial field by direct quadrature, or maximization for p = inf.

    radial_f is the radial representative (of the field or of its gradient
    magnitude); only |radial_f| enters.  r_hi may be inf, in which case the
    integrand must decay fast enough for tail truncation to converge, and a
    QuadratureError reports the cases where it does not.
    """
    if p == _INF:
        _, value = maximize(lambda r: abs(float(np.asarray(radial_f(r)))), r_lo, r_hi)
        return value
    if not (p > 0.0):
        raise DomainError(f"norm exponent must be positive or inf, got {p}")

    def integrand(r):
        r = np.asarray(r, dtype=float)
        return np.abs(radial_f(r)) ** p * r ** (n - 1.0)

    if math.isinf(r_hi):
        value, _ = integrate_decaying(integrand, r_lo, rel_tol=rel_tol)
    else:
        value, _ = integrate(integrand, r_lo, r_hi, rel_tol=rel_tol)
    if value <= 0.0:
        return 0.0
    return math.exp((math.log(sphere_area(n)) + math.log(value)) / p)
