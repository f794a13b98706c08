"""Quantum bouncer with an internal clock: Airy spectra and the dt^2 QFI.

A linear gravitational potential over an infinite floor at ``x = 0``
quantizes each internal level into shifted-Airy eigenfunctions

    psi_{i,n}(x) = N_{i,n} Ai(x / l_i + z_n),
    N_{i,n} = 1 / (sqrt(l_i) Ai'(z_n)),
    l_i = (hbar^2 / (2 m^2 g (1 + z_i)))^(1/3),

with ``z_n`` the (negative) Airy zeros and eigenvalues

    E_{i,n} = m (-g (z_n l_i + x0) + V0) (1 + z_i) + E_i.

Projecting the two-height initial superposition on this basis gives
time-independent coefficients, so the long-time QFI for g grows only as
dt^2 times the variance of dE/dg over the level distribution.

The Airy engine is self-contained: Maclaurin series near the origin,
large-|y| asymptotic expansions, and a Chebyshev bridge in between built
once by marching the Airy ODE with extended-precision Taylor steps (a
bare series/asymptotic split cannot reach 1e-12 in the handoff band).
Gaussian projections of Ai come from the two-sided Laplace transform:

    Int Ai(u) exp(-(u - w)^2 / (4 s^2)) du
        = 2 sqrt(pi) s exp(s^2 w + (2/3) s^6) Ai(w + s^4),

evaluated in log space because the two factors overflow separately.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams
from .gaussian import wrap_angle
from .oracle import Grid, GridWavefunction, bures_qfi, fidelity, tune_bures_delta

_LD = np.longdouble

AI_ZERO = _LD("0.35502805388781723926006318600418317639797917419917724058332651030081004245")
AIP_ZERO = _LD("-0.25881940379280679840518356018920396347909113835536239261196040809129874")

_SQRT_PI = math.sqrt(math.pi)


class AiryConvergenceError(RuntimeError):
    """Zero finding failed to converge (should not happen with safeguards)."""


def _u_coefficients(count: int) -> np.ndarray:
    """Asymptotic series coefficients u_k of the Airy expansions."""
    u = [1.0]
    for k in range(1, count):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1)
                 / ((2 * k - 1) * 216.0 * k))
    return np.array(u)


_U_COEFFS = _u_coefficients(15)
_V_COEFFS = _U_COEFFS * np.array(
    [(6 * k + 1) / (1.0 - 6 * k) if k else 1.0 for k in range(15)])


class AiryEngine:
    """Ai and Ai' to ~1e-12 absolute accuracy on the real line.

    Regions: Maclaurin series for |y| <= series_cutoff, asymptotic
    expansions beyond +-(pos/neg)_cutoff, and Chebyshev interpolants in
    the two bridge bands, built from extended-precision Taylor marching
    of the ODE (leftward on the negative axis; inward from the
    asymptotic seed on the positive axis, which is the stable direction).
    """

    def __init__(self, accuracy: float = 1e-12, series_cutoff: float = 4.5,
                 neg_cutoff: float = 15.0, pos_cutoff: float = 12.0) -> None:
        self.accuracy = accuracy
        self.series_cutoff = series_cutoff
        self.neg_cutoff = neg_cutoff
        self.pos_cutoff = pos_cutoff
        self._neg_table = None
        self._pos_table = None
        self._table_lock = threading.Lock()

    # -- series ------------------------------------------------------------

    @staticmethod
    def _series(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = np.asarray(y, dtype=_LD)
        y3 = y * y * y
        ai = AI_ZERO + AIP_ZERO * y
        term_a = np.full_like(y, AI_ZERO)        # chain n = 0 mod 3
        term_b = AIP_ZERO * y                    # chain n = 1 mod 3
        aip = np.full_like(y, AIP_ZERO)
        dterm_a = np.full_like(y, AIP_ZERO)      # chain m = 0 mod 3 of Ai'
        dterm_b = (AI_ZERO / 2) * y * y          # chain m = 2 mod 3 of Ai'
        aip = aip + dterm_b
        n_a, n_b = 0, 1
        m_a, m_b = 0, 2
        for _ in range(34):
            term_a = term_a * y3 / ((n_a + 2) * (n_a + 3))
            n_a += 3
            term_b = term_b * y3 / ((n_b + 2) * (n_b + 3))
            n_b += 3
            ai = ai + term_a + term_b
            dterm_a = dterm_a * y3 / ((m_a + 1) * (m_a + 3))
            m_a += 3
            dterm_b = dterm_b * y3 / ((m_b + 1) * (m_b + 3))
            m_b += 3
            aip = aip + dterm_a + dterm_b
        return ai, aip

    # -- asymptotic expansions ----------------------------------------------

    @staticmethod
    def _asym_pos(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # Ai(110) ~ e^-769 underflows double precision outright.
        deep = y > 108.0
        if np.any(deep):
            ai = np.zeros_like(y)
            aip = np.zeros_like(y)
            if np.any(~deep):
                ai[~deep], aip[~deep] = AiryEngine._asym_pos(y[~deep])
            return ai, aip
        zeta = (2.0 / 3.0) * y ** 1.5
        s_ai = np.zeros_like(y)
        s_aip = np.zeros_like(y)
        power = np.ones_like(y)
        for k in range(len(_U_COEFFS)):
            sign = -1.0 if k % 2 else 1.0
            s_ai = s_ai + sign * _U_COEFFS[k] * power
            s_aip = s_aip + sign * _V_COEFFS[k] * power
            power = power / zeta
        pref = np.exp(-zeta) / (2.0 * _SQRT_PI * y**0.25)
        return pref * s_ai, -(y**0.25) * np.exp(-zeta) / (2.0 * _SQRT_PI) * s_aip

    @staticmethod
    def _asym_neg(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        far = y < -60.0
        if np.any(far) and np.any(~far):
            ai = np.empty_like(y)
            aip = np.empty_like(y)
            ai[far], aip[far] = AiryEngine._asym_neg(y[far])
            ai[~far], aip[~far] = AiryEngine._asym_neg(y[~far])
            return ai, aip
        n_terms = 6 if (y.size and y[0] < -60.0) else len(_U_COEFFS)
        t = -y
        zeta = (2.0 / 3.0) * t ** 1.5
        theta = zeta - 0.25 * math.pi
        even_ai = np.zeros_like(t)
        odd_ai = np.zeros_like(t)
        even_aip = np.zeros_like(t)
        odd_aip = np.zeros_like(t)
        power = np.ones_like(t)
        for k in range(n_terms):
            sign = -1.0 if (k // 2) % 2 else 1.0
            if k % 2 == 0:
                even_ai = even_ai + sign * _U_COEFFS[k] * power
                even_aip = even_aip + sign * _V_COEFFS[k] * power
            else:
                odd_ai = odd_ai + sign * _U_COEFFS[k] * power
                odd_aip = odd_aip + sign * _V_COEFFS[k] * power
            power = power / zeta
        ai = (np.cos(theta) * even_ai + np.sin(theta) * odd_ai) / (_SQRT_PI * t**0.25)
        aip = (np.sin(theta) * even_aip - np.cos(theta) * odd_aip) * t**0.25 / _SQRT_PI
        return ai, aip

    # -- Chebyshev bridges ---------------------------------------------------

    @staticmethod
    def _taylor_step(y0: _LD, f: _LD, fp: _LD, h: _LD, n_terms: int = 40):
        """Advance (Ai, Ai') from y0 to y0 + h via the ODE's Taylor series."""
        coeffs = [f, fp, y0 * f / 2]
        for n in range(1, n_terms - 2):
            coeffs.append((y0 * coeffs[n] + coeffs[n - 1]) / ((n + 1) * (n + 2)))
        val = _LD(0.0)
        der = _LD(0.0)
        for c in reversed(coeffs):
            val = val * h + c
        for k in range(len(coeffs) - 1, 0, -1):
            der = der * h + k * coeffs[k]
        return val, der

    def _march(self, y_start: float, y_stop: float, f: _LD, fp: _LD,
               step: float = 0.25):
        """March the ODE from y_start to y_stop, recording knots."""
        knots = [(_LD(y_start), f, fp)]
        y = _LD(y_start)
        h = _LD(step if y_stop > y_start else -step)
        n_steps = int(math.ceil(abs(y_stop - y_start) / step))
        for _ in range(n_steps):
            f, fp = self._taylor_step(y, f, fp, h)
            y = y + h
            knots.append((y, f, fp))
        return knots

    def _build_table(self, lo: float, hi: float, knots, n_intervals: int, degree: int = 30):
        edges = np.linspace(lo, hi, n_intervals + 1)
        knot_y = np.array([float(k[0]) for k in knots])
        coeff_ai = []
        coeff_aip = []
        for a, b in zip(edges[:-1], edges[1:]):
            # Chebyshev nodes of the interval, values via local Taylor steps.
            j = np.arange(degree + 1)
            nodes = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * j / degree)
            vals, ders = [], []
            for x in nodes:
                idx = int(np.argmin(np.abs(knot_y - x)))
                y0, f, fp = knots[idx]
                v, d = self._taylor_step(y0, f, fp, _LD(x) - y0)
                vals.append(float(v))
                ders.append(float(d))
            scaled = (nodes - 0.5 * (a + b)) / (0.5 * (b - a))
            coeff_ai.append(np.polynomial.chebyshev.chebfit(scaled, vals, degree))
            coeff_aip.append(np.polynomial.chebyshev.chebfit(scaled, ders, degree))
        return edges, np.array(coeff_ai), np.array(coeff_aip)

    def _tables(self):
        # Built once under a lock: threaded sweeps share the engine.
        with self._table_lock:
            if self._neg_table is None:
                f, fp = self._series(np.array([-self.series_cutoff]))
                knots = self._march(-self.series_cutoff, -self.neg_cutoff - 0.5,
                                    f[0], fp[0])
                n_iv = int(math.ceil(self.neg_cutoff - self.series_cutoff))
                neg = self._build_table(
                    -self.neg_cutoff, -self.series_cutoff, knots, n_iv)
                seed_y = self.pos_cutoff + 0.5
                ai0, aip0 = self._asym_pos(np.array([seed_y]))
                knots = self._march(seed_y, self.series_cutoff - 0.5,
                                    _LD(ai0[0]), _LD(aip0[0]))
                n_iv = int(math.ceil(self.pos_cutoff - self.series_cutoff))
                pos = self._build_table(
                    self.series_cutoff, self.pos_cutoff, knots, n_iv)
                self._pos_table = pos
                self._neg_table = neg
            return self._neg_table, self._pos_table

    @staticmethod
    def _eval_table(table, y: np.ndarray, derivative: bool) -> np.ndarray:
        edges, coeff_ai, coeff_aip = table
        coeffs = coeff_aip if derivative else coeff_ai
        idx = np.clip(np.searchsorted(edges, y, side="right") - 1, 0, len(coeffs) - 1)
        out = np.empty_like(y)
        for block in np.unique(idx):
            sel = idx == block
            a, b = edges[block], edges[block + 1]
            scaled = (y[sel] - 0.5 * (a + b)) / (0.5 * (b - a))
            out[sel] = np.polynomial.chebyshev.chebval(scaled, coeffs[block])
        return out

    # -- public evaluation ----------------------------------------------------

    def _eval(self, y: np.ndarray, derivative: bool) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.empty_like(y)
        neg_table, pos_table = self._tables()
        series = np.abs(y) <= self.series_cutoff
        neg_asym = y < -self.neg_cutoff
        pos_asym = y > self.pos_cutoff
        neg_bridge = (~series) & (~neg_asym) & (y < 0)
        pos_bridge = (~series) & (~pos_asym) & (y > 0)
        if np.any(series):
            ai, aip = self._series(y[series])
            out[series] = (aip if derivative else ai).astype(float)
        if np.any(neg_asym):
            ai, aip = self._asym_neg(y[neg_asym])
            out[neg_asym] = aip if derivative else ai
        if np.any(pos_asym):
            ai, aip = self._asym_pos(y[pos_asym])
            out[pos_asym] = aip if derivative else ai
        if np.any(neg_bridge):
            out[neg_bridge] = self._eval_table(neg_table, y[neg_bridge], derivative)
        if np.any(pos_bridge):
            out[pos_bridge] = self._eval_table(pos_table, y[pos_bridge], derivative)
        return out

    def ai(self, y) -> np.ndarray | float:
        out = self._eval(np.atleast_1d(y), derivative=False)
        return float(out[0]) if np.ndim(y) == 0 else out

    def ai_prime(self, y) -> np.ndarray | float:
        out = self._eval(np.atleast_1d(y), derivative=True)
        return float(out[0]) if np.ndim(y) == 0 else out

    def ai_log(self, y) -> np.ndarray:
        """log|Ai(y)| for y >= 0, usable far beyond the overflow range."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(y)
        small = y <= self.pos_cutoff
        if np.any(small):
            with np.errstate(divide="ignore"):
                out[small] = np.log(np.abs(self._eval(y[small], derivative=False)))
        if np.any(~small):
            yy = y[~small]
            zeta = (2.0 / 3.0) * yy ** 1.5
            s_ai = np.zeros_like(yy)
            power = np.ones_like(yy)
            for k in range(len(_U_COEFFS)):
                s_ai = s_ai + (-1.0 if k % 2 else 1.0) * _U_COEFFS[k] * power
                power = power / zeta
            out[~small] = -zeta - 0.25 * np.log(yy) - math.log(2.0 * _SQRT_PI) \
                + np.log(s_ai)
        return out

    # -- zeros ------------------------------------------------------------------

    def zeros(self, n_max: int) -> np.ndarray:
        """First n_max negative zeros of Ai via safeguarded Newton."""
        n = np.arange(1, n_max + 1, dtype=float)
        t = 3.0 * math.pi * (4.0 * n - 1.0) / 8.0
        t2 = t * t
        z = -(t ** (2.0 / 3.0)) * (1.0 + 5.0 / 48.0 / t2 - 5.0 / 36.0 / t2**2
                                   + 77125.0 / 82944.0 / t2**3)
        for iteration in range(100):
            f = self._eval(z, derivative=False)
            fp = self._eval(z, derivative=True)
            step = f / fp
            step = np.clip(step, -0.5, 0.5)
            z = z - step
            if np.max(np.abs(step)) < 1e-13 * np.max(np.abs(z)):
                break
        else:
            raise AiryConvergenceError("Airy zero Newton did not converge in 100 iterations")
        return z


_DEFAULT_ENGINE: AiryEngine | None = None


def default_engine() -> AiryEngine:
    global _DEFAULT_ENGINE
    if _DEFAULT_ENGINE is None:
        _DEFAULT_ENGINE = AiryEngine()
    return _DEFAULT_ENGINE


def airy_ai(y):
    """Ai(y) to 1e-12 absolute for |y| < 1e3."""
    if np.max(np.abs(y)) >= 1e3:
        raise ValueError("airy_ai supports |y| < 1e3; use the spectral helpers beyond")
    return default_engine().ai(y)


def airy_ai_prime(y):
    """Ai'(y) to ~1e-12 absolute for |y| < 1e3."""
    if np.max(np.abs(y)) >= 1e3:
        raise ValueError("airy_ai_prime supports |y| < 1e3")
    return default_engine().ai_prime(y)


def airy_zero(n: int) -> float:
    """n-th negative zero of Ai, 1 <= n <= 1e4, to 1e-10."""
    if not 1 <= n <= 10**4:
        raise ValueError("airy_zero supports 1 <= n <= 1e4")
    return float(default_engine().zeros(int(n))[-1])


# ---------------------------------------------------------------------------
# Spectrum, projections, QFI
# ---------------------------------------------------------------------------

def gravitational_length(params: PhysicalParams, level: int) -> float:
    """Characteristic Airy length of internal level i."""
    z = params.z_eff(level)
    return (params.hbar**2 / (2.0 * params.m**2 * params.g * (1.0 + z))) ** (1.0 / 3.0)


@dataclass(frozen=True)
class BouncerSpectrum:
    """Eigensystem split as E_{i,n} = level_const_i + band_{i,n}.

    The split matters numerically: the level constant (anchor potential
    plus internal energy) dwarfs the n-dependent band by many orders, so
    phase differences between nearby parameter values must never be
    formed by subtracting full eigenvalues.
    """

    n_max: int
    zeros: np.ndarray          # z_n < 0, shape (n_max,)
    lengths: tuple[float, float]
    level_const: np.ndarray    # J, shape (2,)
    band: np.ndarray           # J, shape (2, n_max): m g (-z_n) l_i (1 + z_i)
    norms: np.ndarray          # m^-1/2 (signed), shape (2, n_max)

    @property
    def energies(self) -> np.ndarray:
        return self.level_const[:, None] + self.band


def bouncer_spectrum(params: PhysicalParams, n_max: int) -> BouncerSpectrum:
    """Discrete eigensystem of the floored linear potential."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if min(params.x_plus, params.x_minus) < 3.0 * params.sigma:
        warnings.warn("floor clearance x_pm >> sigma is violated; the Gaussian "
                      "tail touches the floor", stacklevel=2)
    engine = default_engine()
    zeros = engine.zeros(n_max)
    aip = engine.ai_prime(zeros)
    lengths = (gravitational_length(params, 0), gravitational_length(params, 1))
    level_const = np.empty(2)
    band = np.empty((2, n_max))
    norms = np.empty((2, n_max))
    for i in (0, 1):
        z_i = params.z_eff(i)
        e_i = params.e1 if i else params.e0
        l_i = lengths[i]
        level_const[i] = params.m * (-params.g * params.x0 + params.v0) * (1.0 + z_i) + e_i
        band[i] = params.m * params.g * (-zeros) * l_i * (1.0 + z_i)
        norms[i] = 1.0 / (math.sqrt(l_i) * aip)
    return BouncerSpectrum(n_max, zeros, lengths, level_const, band, norms)


@dataclass(frozen=True)
class BouncerProjection:
    spectrum: BouncerSpectrum
    c_plus: np.ndarray         # real, shape (2, n_max): <psi_{i,n}|psi_+>
    c_minus: np.ndarray
    coefficients: np.ndarray   # complex, shape (2, n_max): renormalized c_{i,n}
    tail: float                # worst truncation mass over (level, path)
    renorm: float              # norm of the raw coefficient vector


def _path_projection(params: PhysicalParams, spectrum: BouncerSpectrum,
                     level: int, x_center: float, mode: str) -> np.ndarray:
    engine = default_engine()
    l_i = spectrum.lengths[level]
    s = params.sigma / l_i
    w = spectrum.zeros + x_center / l_i
    base = l_i * np.abs(spectrum.norms[level]) * (2.0 * math.pi * params.sigma**2) ** -0.25
    sign_n = np.sign(spectrum.norms[level])
    if mode == "gaussian_approx":
        if s < 1.0:
            warnings.warn("gaussian_approx expects sigma >~ l_i", stacklevel=3)
        return sign_n * base * np.exp(-(w / (2.0 * s)) ** 2)
    if mode != "exact":
        raise ValueError(f"unknown coefficient mode {mode!r}")
    arg = w + s**4
    ai_sign = np.ones_like(arg)
    ln_ai = np.empty_like(arg)
    below = arg <= engine.pos_cutoff
    with np.errstate(divide="ignore"):
        if np.any(below):
            vals = engine.ai(arg[below])
            ai_sign[below] = np.sign(vals)
            ln_ai[below] = np.log(np.abs(vals))
        if np.any(~below):
            ln_ai[~below] = engine.ai_log(arg[~below])
    ln_c = np.log(2.0 * _SQRT_PI * s * base) + s * s * w + (2.0 / 3.0) * s**6 + ln_ai
    with np.errstate(over="ignore"):
        mag = np.exp(ln_c)
    return sign_n * ai_sign * mag


def _auto_n_max(params: PhysicalParams, cap: int = 10**4) -> int:
    """Smallest n past the peak where both paths' coefficients die to 1e-8."""
    engine = default_engine()
    best = 0.0
    n_lo = 1
    block_size = 512
    while n_lo <= cap:
        n_hi = min(n_lo + block_size - 1, cap)
        zeros = engine.zeros(n_hi)[n_lo - 1:]
        l0 = gravitational_length(params, 0)
        s = params.sigma / l0
        done_n = None
        for n_idx, z_n in zip(range(n_lo, n_hi + 1), zeros):
            mag = max(
                math.exp(-((z_n + params.x_plus / l0) / (2.0 * s)) ** 2),
                math.exp(-((z_n + params.x_minus / l0) / (2.0 * s)) ** 2),
            )
            best = max(best, mag)
            if best > 0 and mag < 1e-8 * best:
                done_n = n_idx
                break
        if done_n is not None:
            return done_n
        n_lo = n_hi + 1
    warnings.warn("coefficient auto-selection hit the n_max cap of 1e4", stacklevel=3)
    return cap


def bouncer_coefficients(params: PhysicalParams, n_max: int | None = None,
                         mode: str = "exact") -> BouncerProjection:
    """Projection of the two-height superposition on the bouncer basis.

    Exact mode evaluates the Laplace-transform closed form in log space;
    gaussian_approx uses the smooth envelope valid for sigma >~ l_i.  The
    combined coefficients (c+ + e^{i phi} c-)/2 are renormalized to unit
    total mass (the printed combination ignores branch overlap) and the
    renormalization factor is reported.
    """
    if n_max is None:
        n_max = _auto_n_max(params)
    spectrum = bouncer_spectrum(params, n_max)
    c_plus = np.empty((2, n_max))
    c_minus = np.empty((2, n_max))
    for i in (0, 1):
        c_plus[i] = _path_projection(params, spectrum, i, params.x_plus, mode)
        c_minus[i] = _path_projection(params, spectrum, i, params.x_minus, mode)
    phase = complex(math.cos(params.phi), math.sin(params.phi))
    combined = 0.5 * (c_plus + phase * c_minus)
    masses = [float(np.sum(c * c)) for c in (c_plus[0], c_plus[1], c_minus[0], c_minus[1])]
    tail = max(0.0, 1.0 - min(masses))
    if tail > 1e-3:
        warnings.warn(f"coefficient truncation mass {tail:.2e} > 1e-3; raise n_max",
                      stacklevel=2)
    total = float(np.sum(np.abs(combined) ** 2))
    renorm = math.sqrt(total)
    if renorm < 1e-6:
        # Destructive interference of the two path projections: leave the
        # (near-null) coefficients unscaled rather than dividing by ~0.
        warnings.warn("combined projection nearly null (destructive phase); "
                      "coefficients left unnormalized", stacklevel=2)
        return BouncerProjection(spectrum, c_plus, c_minus, combined, tail, renorm)
    return BouncerProjection(spectrum, c_plus, c_minus, combined / renorm, tail, renorm)


def denergy_dg(params: PhysicalParams, spectrum: BouncerSpectrum,
               dv0_dg: float = 0.0) -> np.ndarray:
    """Analytic dE_{i,n}/dg with the anchor V(x0) fixed by default.

    d l_i / d g = -l_i / (3 g), so the zero-point term contributes with a
    2/3 factor; ``dv0_dg`` optionally ties the anchor to the profile.
    """
    out = np.empty_like(spectrum.energies)
    for i in (0, 1):
        z_i = params.z_eff(i)
        l_i = spectrum.lengths[i]
        out[i] = params.m * (-(2.0 / 3.0) * spectrum.zeros * l_i
                             - params.x0 + dv0_dg) * (1.0 + z_i)
    return out


def bouncer_qfi_longtime(params: PhysicalParams, n_max: int | None = None,
                         dv0_dg: float = 0.0,
                         projection: BouncerProjection | None = None) -> float:
    """Long-time QFI for g: (4 dt^2 / hbar^2) Var(dE/dg) over |c_{i,n}|^2."""
    proj = projection if projection is not None else bouncer_coefficients(params, n_max)
    weights = np.abs(proj.coefficients) ** 2
    de = denergy_dg(params, proj.spectrum, dv0_dg)
    mean = float(np.sum(weights * de))
    var = float(np.sum(weights * de * de)) - mean * mean
    return 4.0 * params.dt**2 / params.hbar**2 * max(var, 0.0)


# ---------------------------------------------------------------------------
# Grid rendering of the spectral state (for the fidelity oracle)
# ---------------------------------------------------------------------------

def bouncer_grid(params: PhysicalParams, projection: BouncerProjection,
                 n_points: int = 2**14) -> Grid:
    """Grid from the floor to past the highest contributing turning point."""
    weights = np.abs(projection.coefficients) ** 2
    keep = weights > 1e-16 * weights.max()
    z_sel = projection.spectrum.zeros[np.any(keep, axis=0)]
    l_max = max(projection.spectrum.lengths)
    x_max = l_max * (float(np.max(-z_sel)) + 12.0)
    # Resolve the shortest Airy oscillation with ~16 points.
    lam_min = 2.0 * math.pi * min(projection.spectrum.lengths) / math.sqrt(np.max(-z_sel))
    n_resolve = int(math.ceil(x_max / (lam_min / 16.0)))
    return Grid(0.0, x_max, max(n_points, 1 << n_resolve.bit_length()))


@dataclass(frozen=True)
class SpectralPhaseRef:
    """Common phase reference for comparing spectral states at nearby g.

    The level constants differ between two parameter values only through
    the -m g x0 (1+z_i) term; that difference is formed analytically as a
    single small product, never by subtracting the huge constants.
    """

    g_ref: float
    band_ref: np.ndarray      # J, shape (2,)


def spectral_phase_ref(params: PhysicalParams,
                       projection: BouncerProjection) -> SpectralPhaseRef:
    weights = np.abs(projection.coefficients) ** 2
    band_ref = np.empty(2)
    for i in (0, 1):
        wsum = weights[i].sum()
        band_ref[i] = float((weights[i] @ projection.spectrum.band[i]) / wsum) \
            if wsum > 0 else 0.0
    return SpectralPhaseRef(params.g, band_ref)


def render_spectral(params: PhysicalParams, projection: BouncerProjection,
                    t: float, grid: Grid, ref: SpectralPhaseRef | None = None,
                    chunk: int = 256) -> GridWavefunction:
    """Sample sum_n c_{i,n} e^{-i E_{i,n} t / hbar} psi_{i,n}(x).

    Phases are taken relative to ``ref`` (per-level constants and band
    mean), which callers comparing two states must share; the remaining
    per-level constant is physically irrelevant only within a level, so
    its g-variation is restored exactly via the analytic x0 term.
    """
    engine = default_engine()
    spectrum = projection.spectrum
    xs = grid.xs()
    channels = np.zeros((2, grid.n_points), dtype=complex)
    if ref is None:
        ref = spectral_phase_ref(params, projection)
    for i in (0, 1):
        weights = np.abs(projection.coefficients[i])
        keep = np.where(weights > 1e-14 * weights.max())[0]
        l_i = spectrum.lengths[i]
        z_i = params.z_eff(i)
        const_shift = -params.m * params.x0 * (1.0 + z_i) * (params.g - ref.g_ref)
        for start in range(0, len(keep), chunk):
            sel = keep[start:start + chunk]
            args = xs[None, :] / l_i + spectrum.zeros[sel, None]
            basis = engine.ai(args.ravel()).reshape(args.shape)
            rel_energy = (spectrum.band[i, sel] - ref.band_ref[i]) + const_shift
            phases = wrap_angle(-rel_energy.astype(_LD) * _LD(t) / _LD(params.hbar))
            coeff = (projection.coefficients[i, sel] * np.exp(1j * phases)
                     * spectrum.norms[i, sel])
            channels[i] += coeff @ basis
    return GridWavefunction(grid, channels)


def bouncer_qfi_numeric(params: PhysicalParams, t: float | None = None,
                        n_max: int | None = None, delta: float | None = None,
                        n_points: int = 2**14) -> float:
    """Fidelity QFI of the rendered spectral state (the dt^2 oracle)."""
    t = params.dt if t is None else t
    center = bouncer_coefficients(params, n_max)
    n_fixed = center.spectrum.n_max
    grid = bouncer_grid(params, center, n_points)
    ref = spectral_phase_ref(params, center)
    if delta is None:
        guess = bouncer_qfi_longtime(params.replace(dt=t), projection=center)
        if guess > 0:
            delta = 2.0 * math.sqrt(2e-4 / guess)

    def state_at(g_value: float) -> GridWavefunction:
        proj = bouncer_coefficients(params.replace(g=g_value), n_fixed)
        return render_spectral(params.replace(g=g_value), proj, t, grid, ref)

    def fid(v_lo: float, v_hi: float) -> float:
        return fidelity(state_at(v_lo), state_at(v_hi))

    d, miss, resolved = tune_bures_delta(fid, params.g, delta)
    if not resolved:
        warnings.warn("bouncer QFI below fidelity resolution", stacklevel=2)
        return bures_qfi(miss, d)
    g_full = bures_qfi(miss, d)
    g_half = bures_qfi(1.0 - fid(params.g - 0.25 * d, params.g + 0.25 * d), 0.5 * d)
    return (4.0 * g_half - g_full) / 3.0


def spectrum_to_csv(projection: BouncerProjection, path) -> None:
    """Export rows of i, n, z_n, E_J, c_re, c_im."""
    spectrum = projection.spectrum
    with open(path, "w") as fh:
        fh.write("i,n,z_n,E_J,c_re,c_im\n")
        for i in (0, 1):
            for n in range(spectrum.n_max):
                c = projection.coefficients[i, n]
                fh.write(f"{i},{n + 1},{spectrum.zeros[n]:.17g},"
                         f"{spectrum.energies[i, n]:.17g},"
                         f"{c.real:.17g},{c.imag:.17g}\n")
