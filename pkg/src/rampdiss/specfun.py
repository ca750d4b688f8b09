"""Special functions for the two-site closed forms.

Three families are provided, each returning a :class:`SpecialValue` that
carries a conservative error estimate for the evaluation path taken:

* :func:`gamma_fn`, :func:`loggamma`, :func:`rgamma` use a Lanczos sum
  (``g = 7``, nine terms) with the reflection formula for ``x < 1/2``.
* :func:`bessel_jy` returns ``J_xi`` and ``Y_xi`` for real order and
  positive argument. Small arguments use Temme's series for the reduced
  order, larger ones Steed's continued fraction; both are tied to the
  requested order through Miller's downward recurrence for ``J`` and upward
  recurrence for ``Y``.
* :func:`hyp1f2` evaluates ``1F2(a; b, c; z)`` for real parameters. It
  tries, in order, the double-precision Maclaurin series, the large
  negative argument expansion (algebraic plus oscillatory part) and an
  extended-precision Maclaurin series. If none certifies the accuracy
  target an :class:`~rampdiss.errors.ApproximationGapError` is raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from functools import lru_cache

from .errors import ApproximationGapError, PoleError

__all__ = [
    "SpecialValue",
    "gamma_fn",
    "loggamma",
    "rgamma",
    "sinpi",
    "cospi",
    "bessel_jy",
    "hyp1f2",
    "hyp1f2_series",
    "hyp1f2_asymptotic",
    "hyp1f2_extended",
    "series_switch",
    "SERIES_TARGET",
    "ASYMPTOTIC_TARGET",
]

_EPS = 2.220446049250313e-16

SERIES_TARGET = 1e-8
ASYMPTOTIC_TARGET = 1e-5
FLAG_THRESHOLD = 1e-6


@dataclass(frozen=True)
class SpecialValue:
    """A function value with an error estimate.

    Attributes
    ----------
    value : float or complex
    est_error : float
        Conservative absolute error bound for ``value``.
    regime : str
        Evaluation path that produced the value.
    scale : float
        Envelope magnitude for oscillating results (0 when not applicable).
        Near a zero crossing the error is only meaningful against this scale.
    """

    value: float | complex
    est_error: float
    regime: str = ""
    scale: float = 0.0

    def __post_init__(self):
        if not self.est_error >= 0:
            raise ValueError("est_error must be non-negative")

    @property
    def rel_error(self) -> float:
        mag = max(abs(self.value), self.scale)
        return math.inf if mag == 0 else self.est_error / mag

    @property
    def flagged(self) -> bool:
        """True when cancellation left less than six reliable digits."""
        return self.rel_error > FLAG_THRESHOLD

    def __float__(self) -> float:
        return float(self.value)

    def __complex__(self) -> complex:
        return complex(self.value)


# ---------------------------------------------------------------------- helpers

def _is_nonpositive_integer(x: float, tol: float = 0.0) -> bool:
    return x <= tol and abs(x - round(x)) <= tol


def sinpi(x: float) -> float:
    """``sin(pi x)`` with exact zeros at the integers."""
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def cospi(x: float) -> float:
    """``cos(pi x)`` with exact zeros at half-integers."""
    return sinpi(x + 0.5) if abs(x) < 1e15 else math.cos(math.pi * x)


# ---------------------------------------------------------------------- gamma

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_parts(x: float) -> tuple[float, float]:
    """Return ``(series, t)`` for ``Gamma(x) = sqrt(2 pi) t^(x-1/2) e^-t series``, ``x >= 1/2``."""
    z = x - 1.0
    s = _LANCZOS[0]
    for k in range(1, 9):
        s += _LANCZOS[k] / (z + k)
    return s, z + _LANCZOS_G + 0.5


def _gamma_positive(x: float) -> float:
    s, t = _lanczos_parts(x)
    if x > 140.0:
        half = t ** (0.5 * (x - 0.5))
        return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * s
    return math.sqrt(2.0 * math.pi) * t ** (x - 0.5) * math.exp(-t) * s


def _gamma_rel_error(x: float) -> float:
    return _EPS * (16.0 + 2.0 * abs(x) * (1.0 + abs(math.log(abs(x) + 1.0))))


def gamma_fn(x: float) -> SpecialValue:
    """Gamma function of a real argument.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x == round(x) and 0 < x <= 23:
        value = float(math.factorial(int(x) - 1))
        return SpecialValue(value, 0.0 if x <= 19 else _EPS * value, "factorial")
    if x >= 0.5:
        value = _gamma_positive(x)
    else:
        value = math.pi / (sinpi(x) * _gamma_positive(1.0 - x))
    if math.isinf(value):
        raise OverflowError(f"Gamma({x}) overflows")
    return SpecialValue(value, abs(value) * _gamma_rel_error(x), "lanczos")


def loggamma(x: float) -> SpecialValue:
    """``ln |Gamma(x)|`` for real ``x`` away from the poles."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"log Gamma has a pole at {x}")
    if x >= 0.5:
        s, t = _lanczos_parts(x)
        value = _HALF_LOG_2PI + (x - 0.5) * math.log(t) - t + math.log(s)
    else:
        value = math.log(math.pi / abs(sinpi(x))) - loggamma(1.0 - x).value
    return SpecialValue(value, _EPS * (8.0 + abs(value) + abs(x)), "lanczos")


def rgamma(x: float) -> float:
    """``1/Gamma(x)``, returning exactly 0 at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if x > 171.0:
        return 0.0
    return 1.0 / gamma_fn(x).value


# ---------------------------------------------------------------------- Bessel

# Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k, k = 1..30
_RGAMMA_TAYLOR = (
    1.0, 0.57721566490153286061, -0.65587807152025388108, -0.042002635034095235529,
    0.1665386113822914895, -0.042197734555544336748, -0.0096219715278769735621,
    0.0072189432466630995424, -0.0011651675918590651121, -0.00021524167411495097282,
    0.00012805028238811618615, -0.000020134854780788238656, -1.2504934821426706573e-6,
    1.1330272319816958824e-6, -2.0563384169776071035e-7, 6.1160951044814158179e-9,
    5.0020076444692229301e-9, -1.1812745704870201446e-9, 1.0434267116911005105e-10,
    7.782263439905071254e-12, -3.6968056186422057082e-12, 5.100370287454475979e-13,
    -2.0583260535665067832e-14, -5.3481225394230179824e-15, 1.2267786282382607902e-15,
    -1.1812593016974587695e-16, 1.1866922547516003326e-18, 1.4123806553180317816e-18,
    -2.2987456844353702066e-19, 1.7144063219273374334e-20,
)


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    """``gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)`` for ``|mu| <= 1/2``.

    ``gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`` and
    ``gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2``, both summed from the
    Taylor series so that ``gam1`` keeps full accuracy as ``mu -> 0``.
    """
    gam1 = 0.0
    gam2 = 0.0
    power = 1.0
    for k, ck in enumerate(_RGAMMA_TAYLOR, start=1):
        # 1/Gamma(1+mu) = sum_k c_k mu^(k-1)
        if k % 2 == 1:
            gam2 += ck * power
        else:
            gam1 -= ck * power / mu if mu != 0.0 else 0.0
        power *= mu
    if mu == 0.0:
        gam1 = -_RGAMMA_TAYLOR[1]
    gampl = gam2 - mu * gam1
    gammi = gam2 + mu * gam1
    return gam1, gam2, gampl, gammi


def _bessel_jy_nonneg(xnu: float, x: float, max_iter: int = 100000):
    """Return ``(J, Y, J', Y', n_iter)`` for ``xnu >= 0`` and ``x > 0``."""
    fpmin = 1e-300
    eps = 1e-17
    xmin = 2.0
    nl = int(xnu + 0.5) if x < xmin else max(0, int(xnu - x + 1.5))
    xmu = xnu - nl
    xmu2 = xmu * xmu
    xi = 1.0 / x
    xi2 = 2.0 * xi
    w = xi2 / math.pi
    isign = 1
    h = max(xnu * xi, fpmin)
    b = xi2 * xnu
    d = 0.0
    c = h
    iters = 0
    for i in range(1, max_iter + 1):
        b += xi2
        d = b - d
        if abs(d) < fpmin:
            d = fpmin
        c = b - 1.0 / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = c * d
        h *= delta
        if d < 0.0:
            isign = -isign
        if abs(delta - 1.0) < eps:
            iters = i
            break
    else:
        raise ApproximationGapError(f"Bessel CF1 did not converge for order {xnu}, x = {x}")
    rjl = isign * fpmin
    rjpl = h * rjl
    rjl1 = rjl
    rjp1 = rjpl
    fact = xnu * xi
    for _ in range(nl, 0, -1):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
    if rjl == 0.0:
        rjl = eps
    f = rjpl / rjl
    if x < xmin:
        x2 = 0.5 * x
        pimu = math.pi * xmu
        fact = 1.0 if abs(pimu) < eps else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = xmu * d
        fact2 = 1.0 if abs(e) < eps else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(xmu)
        ff = 2.0 / math.pi * fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        e = math.exp(e)
        p = e / (gampl * math.pi)
        q = 1.0 / (e * math.pi * gammi)
        pimu2 = 0.5 * pimu
        fact3 = 1.0 if abs(pimu2) < eps else math.sin(pimu2) / pimu2
        r = math.pi * pimu2 * fact3 * fact3
        c = 1.0
        d = -x2 * x2
        total = ff + r * q
        total1 = p
        for i in range(1, max_iter + 1):
            ff = (i * ff + p + q) / (i * i - xmu2)
            c *= d / i
            p /= i - xmu
            q /= i + xmu
            delta = c * (ff + r * q)
            total += delta
            delta1 = c * p - i * delta
            total1 += delta1
            if abs(delta) < (1.0 + abs(total)) * eps:
                iters += i
                break
        else:
            raise ApproximationGapError(f"Temme series did not converge for order {xnu}, x = {x}")
        rymu = -total
        ry1 = -total1 * xi2
        rymup = xmu * xi * rymu - ry1
        rjmu = w / (rymup - f * rymu)
    else:
        a = 0.25 - xmu2
        p = -0.5 * xi
        q = 1.0
        br = 2.0 * x
        bi = 2.0
        fact = a * xi / (p * p + q * q)
        cr = br + q * fact
        ci = bi + p * fact
        den = br * br + bi * bi
        dr = br / den
        di = -bi / den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        temp = p * dlr - q * dli
        q = p * dli + q * dlr
        p = temp
        for i in range(2, max_iter + 1):
            a += 2 * (i - 1)
            bi += 2.0
            dr = a * dr + br
            di = a * di + bi
            if abs(dr) + abs(di) < fpmin:
                dr = fpmin
            fact = a / (cr * cr + ci * ci)
            cr = br + cr * fact
            ci = bi - ci * fact
            if abs(cr) + abs(ci) < fpmin:
                cr = fpmin
            den = dr * dr + di * di
            dr /= den
            di /= -den
            dlr = cr * dr - ci * di
            dli = cr * di + ci * dr
            temp = p * dlr - q * dli
            q = p * dli + q * dlr
            p = temp
            if abs(dlr - 1.0) + abs(dli) < eps:
                iters += i
                break
        else:
            raise ApproximationGapError(f"Steed CF2 did not converge for order {xnu}, x = {x}")
        gam = (p - f) / q
        rjmu = math.copysign(math.sqrt(w / ((p - f) * gam + q)), rjl)
        rymu = rjmu * gam
        rymup = rymu * (p + q / gam)
        ry1 = xmu * xi * rymu - rymup
    fact = rjmu / rjl
    rj = rjl1 * fact
    rjp = rjp1 * fact
    for i in range(1, nl + 1):
        rytemp = (xmu + i) * xi2 * ry1 - rymu
        rymu = ry1
        ry1 = rytemp
    ry = rymu
    ryp = xnu * xi * rymu - ry1
    return rj, ry, rjp, ryp, iters + nl


def bessel_jy(order: float, x: float) -> tuple[SpecialValue, SpecialValue]:
    """Bessel functions of the first and second kind, ``(J_order(x), Y_order(x))``.

    Negative orders go through the connection formulas
    ``J_-m = cos(m pi) J_m - sin(m pi) Y_m`` and
    ``Y_-m = sin(m pi) J_m + cos(m pi) Y_m``.
    Error estimates are expressed against the modulus ``sqrt(J^2 + Y^2)``,
    the natural scale for these oscillating pairs.

    Raises
    ------
    ValueError
        If ``x <= 0``.
    """
    order = float(order)
    x = float(x)
    if not x > 0:
        raise ValueError(f"Bessel functions need x > 0, got {x}")
    m = abs(order)
    if x >= HANKEL_SWITCH + m * m:
        j, y, trunc = _bessel_hankel(m, x)
        cost = 64.0 + 4.0 * m * m
    else:
        j, y, _, _, iters = _bessel_jy_nonneg(m, x)
        trunc = 0.0
        cost = 64.0 + 4.0 * m * m + math.sqrt(iters) + 128.0 * x
    if order < 0:
        cm, sm = cospi(m), sinpi(m)
        j, y = cm * j - sm * y, sm * j + cm * y
    if not (math.isfinite(j) and math.isfinite(y)):
        raise OverflowError(f"Bessel functions of order {order} overflow at x = {x}")
    modulus = math.hypot(j, y)
    err = modulus * (_EPS * cost + trunc)
    return SpecialValue(j, err, "bessel", modulus), SpecialValue(y, err, "bessel", modulus)


#: below ``HANKEL_SWITCH + order^2`` the continued fractions are used
HANKEL_SWITCH = 40.0


def _bessel_hankel(m: float, x: float) -> tuple[float, float, float]:
    """Large-argument expansion of ``(J_m, Y_m)`` for ``x >> m^2``.

    ``J = sqrt(2/(pi x)) (P cos chi - Q sin chi)`` and
    ``Y = sqrt(2/(pi x)) (P sin chi + Q cos chi)`` with
    ``chi = x - (m/2 + 1/4) pi``. The third return value bounds the relative
    truncation error by the first omitted term.
    """
    mu = 4.0 * m * m
    p_sum, q_sum = 1.0, 0.0
    term = 1.0
    last = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(nxt) > abs(term) and k > 2:
            break
        term = nxt
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q_sum += sign * term
        else:
            p_sum += sign * term
        last = abs(term)
        if last < _EPS * 1e-3 or k > 200:
            break
    chi_c = (0.5 * m + 0.25) * math.pi
    cx, sx = math.cos(x), math.sin(x)
    cc, sc = math.cos(chi_c), math.sin(chi_c)
    cos_chi = cx * cc + sx * sc
    sin_chi = sx * cc - cx * sc
    pref = math.sqrt(2.0 / (math.pi * x))
    j = pref * (p_sum * cos_chi - q_sum * sin_chi)
    y = pref * (p_sum * sin_chi + q_sum * cos_chi)
    return j, y, last


# ---------------------------------------------------------------------- 1F2

def _check_parameters(a: float, b: float, c: float) -> int | None:
    """Return the termination index of a polynomial series, or None.

    Raises :class:`PoleError` if a lower parameter vanishes before termination.
    """
    stop = int(round(-a)) if _is_nonpositive_integer(a) else None
    for lower in (b, c):
        if _is_nonpositive_integer(lower):
            if stop is None or stop > -round(lower):
                raise PoleError(f"1F2 lower parameter {lower} is a non-positive integer")
    return stop


def hyp1f2_series(a: float, b: float, c: float, z: float, max_terms: int = 100000) -> SpecialValue:
    """Maclaurin series in double precision with compensated summation.

    ``est_error`` combines rounding (proportional to the largest partial
    term, which tracks cancellation in alternating series) with a bound
    on the truncated tail.
    """
    stop = _check_parameters(a, b, c)
    terms = [1.0]
    term = 1.0
    abs_sum = 1.0
    biggest = 1.0
    k = 0
    while True:
        if stop is not None and k >= stop:
            tail = 0.0
            break
        ratio = (a + k) / ((b + k) * (c + k) * (k + 1)) * z
        term *= ratio
        k += 1
        terms.append(term)
        abs_sum += abs(term)
        biggest = max(biggest, abs(term))
        if not math.isfinite(term):
            raise ApproximationGapError(f"1F2 series overflows at z = {z}")
        partial = math.fsum(terms)
        nxt = abs((a + k) / ((b + k) * (c + k) * (k + 1)) * z)
        if abs(term) < 1e-16 * abs(partial) and nxt < 0.5:
            tail = 2.0 * abs(term) * nxt
            break
        if k >= max_terms:
            raise ApproximationGapError(f"1F2 series did not converge in {max_terms} terms")
    value = math.fsum(terms)
    err = _EPS * (2.0 * biggest + 0.1 * abs_sum) * math.sqrt(k + 1) + tail
    return SpecialValue(value, err, "series" if stop is None else "polynomial")


def _oscillatory_operator(a: float, b: float, c: float, s: complex) -> list[complex]:
    """Coefficients ``P_m(s)`` of ``L[e^{2ix} x^s] = e^{2ix} sum_m P_m(s) x^(s+m)``.

    ``L = D (D + 2b - 2)(D + 2c - 2) + 4 x^2 (D + 2a)`` with ``D = x d/dx``
    annihilates ``1F2(a; b, c; -x^2)``.
    """
    def apply_d(poly, shift):
        out = [0j] * (len(poly) + 1)
        for j, coef in enumerate(poly):
            out[j] += (s + j + shift) * coef
            out[j + 1] += 2j * coef
        return out

    cubic = apply_d(apply_d(apply_d([1 + 0j], 0.0), 2 * c - 2), 2 * b - 2)
    lin = apply_d([1 + 0j], 2 * a)
    total = list(cubic) + [0j] * 2
    for j, coef in enumerate(lin):
        total[j + 2] += 4.0 * coef
    return total


@lru_cache(maxsize=1024)
def _oscillatory_coefficients(a: float, b: float, c: float, count: int) -> tuple[float, tuple[complex, ...]]:
    """Exponent ``rho`` and expansion coefficients of the oscillatory solution."""
    rho = a - b - c + 0.5
    coeffs = [1 + 0j]
    for j in range(1, count):
        acc = coeffs[j - 1] * _oscillatory_operator(a, b, c, rho - j + 1)[1]
        if j >= 2:
            acc += coeffs[j - 2] * _oscillatory_operator(a, b, c, rho - j + 2)[0]
        coeffs.append(-acc / _oscillatory_operator(a, b, c, rho - j)[2])
    return rho, tuple(coeffs)


def _optimal_sum(terms_iter, max_terms: int = 200):
    """Sum an asymptotic series up to its smallest term."""
    total = 0j
    prev = math.inf
    err = math.inf
    for k, term in enumerate(terms_iter):
        mag = abs(term)
        if mag > prev or k >= max_terms:
            err = prev
            break
        total += term
        prev = mag
        if mag == 0.0:
            err = 0.0
            break
        if mag < 1e-17 * abs(total):
            err = mag
            break
    return total, err


def hyp1f2_asymptotic(a: float, b: float, c: float, z: float) -> SpecialValue:
    """Large negative ``z = -x^2`` expansion.

    ``1F2 ~ G_alg x^(-2a) 3F0(a, 1+a-b, 1+a-c; ; -1/x^2)
          + Re[G_osc e^{i(2x + pi rho/2)} x^rho sum_k e_k x^-k]``
    with ``G_alg = Gamma(b)Gamma(c)/(Gamma(b-a)Gamma(c-a))``,
    ``G_osc = Gamma(b)Gamma(c)/(Gamma(a) sqrt(pi))`` and ``rho = a - b - c + 1/2``.
    Each series is truncated at its smallest term; three times that term is the error estimate.
    """
    if not z < 0:
        raise ApproximationGapError("the asymptotic regime covers negative z only")
    _check_parameters(a, b, c)
    x = math.sqrt(-z)
    gb = gamma_fn(b).value
    gc = gamma_fn(c).value
    g_alg = gb * gc * rgamma(b - a) * rgamma(c - a)
    g_osc = gb * gc * rgamma(a) / math.sqrt(math.pi)

    inv = -1.0 / (x * x)

    def algebraic_terms():
        t = 1.0
        k = 0
        while True:
            yield t
            t *= (a + k) * (1 + a - b + k) * (1 + a - c + k) / (k + 1) * inv
            k += 1

    alg_sum, alg_err = (0j, 0.0) if g_alg == 0.0 else _optimal_sum(algebraic_terms())
    alg_scale = abs(g_alg) * x ** (-2.0 * a)
    alg_value = g_alg * x ** (-2.0 * a) * alg_sum.real

    osc_value = 0.0
    osc_err = 0.0
    osc_scale = 0.0
    if g_osc != 0.0:
        rho, coeffs = _oscillatory_coefficients(a, b, c, 160)
        osc_sum, osc_err = _optimal_sum(e / x ** k for k, e in enumerate(coeffs))
        phase = complex(math.cos(2 * x + 0.5 * math.pi * rho), math.sin(2 * x + 0.5 * math.pi * rho))
        osc_scale = abs(g_osc) * x ** rho
        osc_value = (g_osc * x ** rho * phase * osc_sum).real
    value = alg_value + osc_value
    # three times the smallest term covers the observed optimal-truncation error
    err = 3.0 * (alg_scale * alg_err + osc_scale * osc_err)
    # rounding, including the phase error of cos(2x) at large x
    err += _EPS * (64.0 * alg_scale + (64.0 + 4.0 * x) * osc_scale)
    return SpecialValue(value, err, "asymptotic", alg_scale + osc_scale)


#: precision ceiling of the decimal fallback
MAX_DIGITS = 4000


def hyp1f2_extended(a: float, b: float, c: float, z: float, digits: int | None = None) -> SpecialValue:
    """Maclaurin series in decimal arithmetic with enough digits to absorb cancellation."""
    stop = _check_parameters(a, b, c)
    if stop is None and 2.0 * math.sqrt(abs(z)) / math.log(10.0) > MAX_DIGITS:
        # the largest term grows like exp(2 sqrt|z|)
        raise ApproximationGapError(f"extended series at z = {z} would need more than {MAX_DIGITS} digits")
    if digits is None:
        # size of the largest term, estimated in log space
        log_big = 0.0
        log_term = 0.0
        k = 0
        while True:
            step = abs((a + k) / ((b + k) * (c + k) * (k + 1)) * z)
            if (stop is not None and k >= stop) or (step < 1.0 and k > 2):
                break
            log_term += math.log(step) if step > 0 else -math.inf
            log_big = max(log_big, log_term)
            k += 1
            if k > 10 ** 6:
                raise ApproximationGapError("extended series would need too many terms")
        digits = int(40 + log_big / math.log(10.0))
    if digits > MAX_DIGITS:
        raise ApproximationGapError(f"extended series would need {digits} digits")
    with localcontext() as ctx:
        ctx.prec = digits
        A, B, C, Z = Decimal(a), Decimal(b), Decimal(c), Decimal(z)
        term = Decimal(1)
        total = Decimal(1)
        biggest = Decimal(1)
        floor = Decimal(10) ** (-(digits - 5))
        k = 0
        while True:
            if stop is not None and k >= stop:
                break
            term = term * (A + k) / ((B + k) * (C + k) * (k + 1)) * Z
            k += 1
            total += term
            biggest = max(biggest, abs(term))
            if abs(term) <= floor * biggest and abs(Z) < Decimal(k + 1) ** 2:
                break
        value = float(total)
        err = float(biggest * Decimal(10) ** (-(digits - 8))) + _EPS * abs(value)
    return SpecialValue(value, err, "extended")


@lru_cache(maxsize=4096)
def series_switch(a: float, b: float, c: float) -> float:
    """Largest ``|z|`` (negative axis) where the double series meets its target.

    Found by bisection on ``log|z|`` and cached per parameter triple.
    """
    def ok(mag):
        try:
            v = hyp1f2_series(a, b, c, -mag)
        except (ApproximationGapError, OverflowError):
            return False
        return v.est_error <= SERIES_TARGET * max(abs(v.value), 1e-300)

    lo, hi = 0.0, 8.0
    if not ok(10.0 ** lo):
        lo, hi = -8.0, 0.0
        if not ok(10.0 ** lo):
            return 0.0
    if ok(10.0 ** hi):
        return 10.0 ** hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if ok(10.0 ** mid):
            lo = mid
        else:
            hi = mid
    return 10.0 ** lo


def hyp1f2(a: float, b: float, c: float, z: float) -> SpecialValue:
    """Generalized hypergeometric ``1F2(a; b, c; z)`` for real parameters.

    Raises
    ------
    PoleError
        If ``b`` or ``c`` is a non-positive integer reached by the series.
    ApproximationGapError
        If no evaluation regime certifies its accuracy target.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    stop = _check_parameters(a, b, c)
    if z == 0.0:
        return SpecialValue(1.0, 0.0, "series")
    if stop is not None or z > 0 or -z <= series_switch(a, b, c):
        val = hyp1f2_series(a, b, c, z)
        if val.est_error <= SERIES_TARGET * abs(val.value) or stop is not None:
            return val
    candidates = []
    if z < 0:
        asym = hyp1f2_asymptotic(a, b, c, z)
        scale = max(abs(asym.value), asym.scale, asym.est_error)
        if math.isfinite(asym.est_error) and asym.est_error <= 1e-2 * SERIES_TARGET * scale:
            return asym
        candidates.append(asym)
    try:
        ext = hyp1f2_extended(a, b, c, z)
        if ext.est_error <= SERIES_TARGET * abs(ext.value):
            return ext
        candidates.append(ext)
    except ApproximationGapError:
        pass
    for cand in candidates:
        if cand.regime == "asymptotic" and cand.rel_error <= ASYMPTOTIC_TARGET:
            return cand
    raise ApproximationGapError(f"no regime certifies 1F2({a}; {b}, {c}; {z})")
