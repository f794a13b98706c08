"""Complex-Gaussian branch algebra and closed-form evolution maps.

A branch is one arm x internal-level component of the interferometric
superposition, stored as a unit-norm Gaussian

    psi(x) = (2 pi S^2)^(-1/4) exp(-(x-X)^2 / (4 S^2))
             * exp(i [ L(x) + q (x - X)^2 ]),

where ``L(x) = sum(terms) + b (x - x_ref)`` is a *phase ledger*: the
constant part is kept as labeled extended-precision coefficients so that
phase differences between components are formed term-by-term before any
modular reduction (raw constants reach 1e16 rad; only differences are
observable).  ``q`` is the quadratic chirp that free spreading generates;
the exact linear-potential evolution is Gaussian-preserving, and the
chirp is required for the evolved state to be the exact solution rather
than a minimum-uncertainty lookalike.

Sign conventions: x points up, the potential slope g is positive, so a
freely falling branch acquires negative mean momentum ``-m g dt (1+z)``
(the ledger slope times hbar).  Quoted magnitudes elsewhere refer to
|mean momentum|.

The evolution maps act on pre-evolution branches (width sigma, zero
momentum, empty ledger) and return the closed-form evolved branch; there
is no time stepping anywhere in this module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams, check_regime

_LD = np.longdouble
TWO_PI_LD = _LD("6.283185307179586476925286766559005768")
PI_LD = _LD("3.141592653589793238462643383279502884")


class EvolutionError(ValueError):
    """Raised when an evolution map's preconditions are violated."""


def wrap_angle(value) -> np.ndarray | float:
    """Reduce an extended-precision phase to (-pi, pi] in float64."""
    reduced = np.mod(np.asarray(value, dtype=_LD) + PI_LD, TWO_PI_LD) - PI_LD
    out = np.asarray(reduced, dtype=float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PhaseLedger:
    """Labeled decomposition of a branch phase, L(x) = sum(terms) + b (x - x_ref)."""

    terms: tuple[tuple[str, float], ...]   # (name, coefficient in rad); longdouble-valued
    slope: float                           # b, rad/m (stored as longdouble)
    x_ref: float                           # m

    @staticmethod
    def make(terms: dict[str, object], slope, x_ref: float) -> "PhaseLedger":
        items = tuple((name, _LD(value)) for name, value in terms.items())
        return PhaseLedger(items, _LD(slope), float(x_ref))

    def term_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.terms)

    def constant(self) -> np.longdouble:
        total = _LD(0.0)
        for _, value in self.terms:
            total = total + _LD(value)
        return total

    def constant_wrapped(self) -> np.longdouble:
        """Sum of the terms, each reduced mod 2 pi before summation."""
        total = _LD(0.0)
        for _, value in self.terms:
            total = total + np.mod(_LD(value), TWO_PI_LD)
        return total

    def value_at(self, x: float) -> np.longdouble:
        return self.constant() + _LD(self.slope) * (_LD(x) - _LD(self.x_ref))

    def diff_constant(self, other: "PhaseLedger") -> np.longdouble:
        """Term-by-term difference of the constants (exact where terms match)."""
        if self.x_ref != other.x_ref:
            raise ValueError("ledger difference requires identical x_ref")
        mine = dict(self.terms)
        theirs = dict(other.terms)
        total = _LD(0.0)
        for name in sorted(set(mine) | set(theirs)):
            total = total + (_LD(mine.get(name, 0.0)) - _LD(theirs.get(name, 0.0)))
        return total

    def diff_at(self, x_self: float, other: "PhaseLedger", x_other: float) -> np.longdouble:
        """self(x_self) - other(x_other), constants subtracted term-by-term.

        The slope contribution is regrouped so that equal slopes multiply
        the (small) evaluation-point difference rather than the large
        lever arms separately; rounding then scales with the physical
        phase difference instead of the absolute phases.
        """
        out = self.diff_constant(other)
        slope_diff = _LD(self.slope) - _LD(other.slope)
        out = out + _LD(other.slope) * (_LD(x_self) - _LD(x_other))
        out = out + slope_diff * (_LD(x_self) - _LD(self.x_ref))
        return out


_EMPTY_LEDGER_CACHE: dict[float, PhaseLedger] = {}


def empty_ledger(x_ref: float) -> PhaseLedger:
    if x_ref not in _EMPTY_LEDGER_CACHE:
        _EMPTY_LEDGER_CACHE[x_ref] = PhaseLedger.make({}, 0.0, x_ref)
    return _EMPTY_LEDGER_CACHE[x_ref]


@dataclass(frozen=True)
class GaussianBranch:
    """One path (x) internal-level component of the clock state.

    ``amplitude`` is the superposition coefficient; the wavefunction
    itself is unit-norm by construction, so the component's contribution
    to the total norm is |amplitude| (up to cross-branch overlaps).
    """

    amplitude: complex
    ledger: PhaseLedger
    mean_x: float           # m
    mean_p: float           # kg m/s  (= hbar * ledger.slope)
    var_x: float            # m^2
    chirp: float            # rad/m^2, quadratic phase about mean_x
    internal_level: int     # 0 | 1
    path_label: str         # "plus" | "minus"

    def __post_init__(self) -> None:
        if not (self.var_x > 0 and math.isfinite(self.var_x)):
            raise ValueError("var_x must be positive and finite")
        if not (math.isfinite(self.amplitude.real) and math.isfinite(self.amplitude.imag)):
            raise ValueError("amplitude must be finite")
        if self.internal_level not in (0, 1):
            raise ValueError("internal_level must be 0 or 1")
        if self.path_label not in ("plus", "minus"):
            raise ValueError("path_label must be 'plus' or 'minus'")


@dataclass(frozen=True)
class ClockState:
    """Superposition of Gaussian branches over the two internal levels."""

    components: tuple[GaussianBranch, ...]
    metadata: tuple[str, ...] = ()

    def branch(self, path: str, level: int) -> GaussianBranch:
        for b in self.components:
            if b.path_label == path and b.internal_level == level:
                return b
        raise KeyError((path, level))


# ---------------------------------------------------------------------------
# State construction and evolution
# ---------------------------------------------------------------------------

def make_initial_state(params: PhysicalParams) -> ClockState:
    """Equal superposition of the two heights and the two clock levels.

    Amplitudes are 1/2 on the plus path and e^{i phi}/2 on the minus
    path; the printed amplitudes ignore the branch overlap, which is
    exponentially small in the validated regime (the exact norm is
    always available through :func:`state_norm_sq`).
    """
    metadata: tuple[str, ...] = ()
    if params.sigma >= params.h:
        metadata = ("sigma exceeds branch separation; branches overlap strongly",)
    ledger = empty_ledger(params.x0)
    minus_amp = 0.5 * complex(math.cos(params.phi), math.sin(params.phi))
    components = []
    for path, x_c, amp in (("plus", params.x_plus, 0.5 + 0.0j), ("minus", params.x_minus, minus_amp)):
        for level in (0, 1):
            components.append(GaussianBranch(
                amplitude=amp, ledger=ledger, mean_x=x_c, mean_p=0.0,
                var_x=params.sigma**2, chirp=0.0,
                internal_level=level, path_label=path,
            ))
    return ClockState(tuple(components), metadata)


def _require_pre_evolution(branch: GaussianBranch, params: PhysicalParams) -> None:
    if abs(branch.var_x - params.sigma**2) > 1e-12 * params.sigma**2 \
            or branch.chirp != 0.0 or branch.mean_p != 0.0 or branch.ledger.terms:
        raise EvolutionError("evolution maps act on pre-evolution branches "
                             "(width sigma, zero momentum, empty ledger)")


def _spreading(params: PhysicalParams, z: float) -> tuple[float, float]:
    """Evolved variance and chirp for effective mass m/(1-z)."""
    m_eff = params.m / (1.0 - z)
    eps = params.hbar * params.dt / (2.0 * m_eff * params.sigma**2)
    var = params.sigma**2 * (1.0 + eps * eps)
    chirp = params.hbar * params.dt / (8.0 * m_eff * params.sigma**2 * var)
    return var, chirp


def evolve_freefall_full(branch: GaussianBranch, params: PhysicalParams) -> GaussianBranch:
    """Exact evolution in the linearized potential V_F = g (x - x0) + V0.

    Internal level i feels effective mass m/(1-z_i) and potential
    m (1+z_i) V_F, so over a time dt:

        mean_x -> x_c - (g dt^2 / 2)(1 - z_i^2)
        mean_p -> -m g dt (1 + z_i)
        S_i^2  -> sigma^2 + (hbar dt (1 - z_i) / (2 m sigma))^2

    and the phase ledger gains

        rest_internal   = -dt E_i / hbar
        potential_const = -dt m (1+z_i) V0 / hbar
        cubic           = -(m g^2 dt^3 / 6 hbar)(1 + z_i - z_i^2)
        slope           = -m g (1+z_i) dt / hbar

    all with x_ref = x0.  The cubic constant is the bracketed classical
    action term; dimensional analysis fixes its prefactor to g^2/6 (the
    g/3 form sometimes quoted is a misprint).  The exact bracket is
    (1+z)^2(1-z); the z^3 difference from the truncated form used here
    is far below double precision for any physical z.
    """
    _require_pre_evolution(branch, params)
    if params.dt == 0.0:
        return branch
    z = params.z_eff(branch.internal_level)
    m, g, dt, hb = params.m, params.g, params.dt, params.hbar
    var, chirp = _spreading(params, z)
    zl = _LD(z)
    dt_l, m_l, g_l, hb_l = _LD(dt), _LD(m), _LD(g), _LD(hb)
    e_i = params.e1 if branch.internal_level == 1 else params.e0
    # z-orders are stored as separate ledger terms: the clock corrections
    # sit ~10 decades below the leading coefficients, so folding them into
    # one number would push them under the extended-precision ulp.
    pot = -dt_l * m_l * _LD(params.v0) / hb_l
    cubic = -(m_l * g_l * g_l * dt_l**3 / (6 * hb_l))
    terms = {
        "rest_internal": -dt_l * _LD(e_i) / hb_l,
        "potential_const": pot,
        "potential_const_z": pot * zl,
        "cubic": cubic,
        "cubic_z": cubic * (zl - zl * zl),
    }
    slope = -m_l * g_l * (1 + zl) * dt_l / hb_l
    return GaussianBranch(
        amplitude=branch.amplitude,
        ledger=PhaseLedger.make(terms, slope, params.x0),
        mean_x=branch.mean_x - 0.5 * g * dt * dt * (1.0 - z * z),
        mean_p=-m * g * dt * (1.0 + z),
        var_x=var,
        chirp=chirp,
        internal_level=branch.internal_level,
        path_label=branch.path_label,
    )


def evolve_freefall_approx(branch: GaussianBranch, params: PhysicalParams) -> GaussianBranch:
    """Free-fall map truncated to first order in z_i.

    The trajectory, momentum and width lose their z dependence entirely;
    the ledger keeps (1+z_i) on the potential and cubic terms.  Warns if
    the separation-of-scales inequalities behind the truncation fail.
    """
    _require_pre_evolution(branch, params)
    if params.dt == 0.0:
        return branch
    report = check_regime(params)
    for name in ("momentum_shift_small", "position_shift_small", "width_shift_small"):
        if not report.entry(name).satisfied:
            warnings.warn(f"approximate free-fall map outside its regime: {name}",
                          stacklevel=2)
    z = params.z_eff(branch.internal_level)
    m, g, dt, hb = params.m, params.g, params.dt, params.hbar
    var, chirp = _spreading(params, 0.0)
    zl = _LD(z)
    dt_l, m_l, g_l, hb_l = _LD(dt), _LD(m), _LD(g), _LD(hb)
    e_i = params.e1 if branch.internal_level == 1 else params.e0
    pot = -dt_l * m_l * _LD(params.v0) / hb_l
    cubic = -(m_l * g_l * g_l * dt_l**3 / (6 * hb_l))
    terms = {
        "rest_internal": -dt_l * _LD(e_i) / hb_l,
        "potential_const": pot,
        "potential_const_z": pot * zl,
        "cubic": cubic,
        "cubic_z": cubic * zl,
    }
    slope = -m_l * g_l * (1 + zl) * dt_l / hb_l
    return GaussianBranch(
        amplitude=branch.amplitude,
        ledger=PhaseLedger.make(terms, slope, params.x0),
        mean_x=branch.mean_x - 0.5 * g * dt * dt,
        mean_p=-m * g * dt,
        var_x=var,
        chirp=chirp,
        internal_level=branch.internal_level,
        path_label=branch.path_label,
    )


def piecewise_potential(x: float, params: PhysicalParams) -> float:
    """Piecewise-linear potential with the kink at x0 (upper piece at x0)."""
    if x >= params.x0:
        return params.g_plus * (x - params.x_plus0) + params.vn_plus0
    return params.g_minus * (x - params.x_minus0) + params.vn_minus0


def piecewise_continuity_gap(params: PhysicalParams) -> float:
    """|upper(x0) - lower(x0)|; zero when the anchors are chosen consistently."""
    upper = params.g_plus * (params.x0 - params.x_plus0) + params.vn_plus0
    lower = params.g_minus * (params.x0 - params.x_minus0) + params.vn_minus0
    return abs(upper - lower)


def evolve_mz(branch: GaussianBranch, params: PhysicalParams) -> GaussianBranch:
    """Trapped-arm evolution: the potential couples only through time dilation.

    The trap cancels the gravitational force on the center of mass, so the
    branch stays put and spreads freely; level i only accumulates

        L(x) = -dt E_i / hbar - dt m z_i V_MZ(x) / hbar

    on its own side of the kink.  The tiny momentum implied by the phase
    slope (-dt E_i g_side / c^2, many orders below the momentum width) is
    stored for consistency; it is the quoted <p> = 0 at the working order.
    """
    _require_pre_evolution(branch, params)
    if params.dt == 0.0:
        return branch
    var, chirp = _spreading(params, 0.0)
    if abs(branch.mean_x - params.x0) <= 5.0 * math.sqrt(var):
        raise EvolutionError("branch straddles potential kink")
    if branch.mean_x > params.x0:
        g_side, x_side0, vn_side = params.g_plus, params.x_plus0, params.vn_plus0
    else:
        g_side, x_side0, vn_side = params.g_minus, params.x_minus0, params.vn_minus0
    z = params.z_eff(branch.internal_level)
    zl = _LD(z)
    dt_l, m_l, hb_l = _LD(params.dt), _LD(params.m), _LD(params.hbar)
    e_i = params.e1 if branch.internal_level == 1 else params.e0
    # V_MZ(x) = g_side (x - x_side0) + vn_side, re-anchored at x_ref = x0.
    # The fixed anchor and the slope-dependent constant live in separate
    # ledger terms so parameter differentiation never subtracts a tiny
    # g-dependent piece from a huge constant.
    terms = {
        "rest_internal": -dt_l * _LD(e_i) / hb_l,
        "potential_anchor": -dt_l * m_l * zl * _LD(vn_side) / hb_l,
        "potential_slope_const": -dt_l * m_l * zl * _LD(g_side)
        * (_LD(params.x0) - _LD(x_side0)) / hb_l,
    }
    slope = -dt_l * m_l * zl * _LD(g_side) / hb_l
    return GaussianBranch(
        amplitude=branch.amplitude,
        ledger=PhaseLedger.make(terms, slope, params.x0),
        mean_x=branch.mean_x,
        mean_p=params.hbar * float(slope),
        var_x=var,
        chirp=chirp,
        internal_level=branch.internal_level,
        path_label=branch.path_label,
    )


_SCENARIO_MAPS = {
    "free_fall": evolve_freefall_full,
    "free_fall_approx": evolve_freefall_approx,
    "mach_zehnder": evolve_mz,
}


def evolve_state(state: ClockState, params: PhysicalParams,
                 scenario: str = "free_fall") -> ClockState:
    """Apply the scenario's branch map to every component."""
    try:
        branch_map = _SCENARIO_MAPS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}") from None
    return ClockState(
        tuple(branch_map(c, params) for c in state.components),
        state.metadata,
    )


# ---------------------------------------------------------------------------
# Overlaps and Gaussian pair moments
# ---------------------------------------------------------------------------

class PairMoments:
    """Closed-form integrals over a pair of branches.

    conj(psi_a) psi_b = C exp(-alpha u^2 + beta u) in the shifted
    coordinate u = x - (X_a + X_b)/2, so any <P_a psi_a | P_b psi_b> with
    polynomial factors reduces to Gaussian moments.  The huge, shared
    ledger constants enter only through their term-by-term difference,
    computed in extended precision and wrapped once.
    """

    __slots__ = ("overlap", "_mu", "_s2", "off_a", "off_b", "orthogonal")

    def __init__(self, a: GaussianBranch, b: GaussianBranch) -> None:
        if a.internal_level != b.internal_level:
            self.orthogonal = True
            self.overlap = 0.0j
            self._mu = 0.0j
            self._s2 = 0.0j
            self.off_a = 0.0
            self.off_b = 0.0
            return
        self.orthogonal = False
        if a.ledger.x_ref != b.ledger.x_ref:
            raise ValueError("pair moments require a common ledger x_ref")
        d = b.mean_x - a.mean_x
        x_mid = 0.5 * (a.mean_x + b.mean_x)
        inv4a = 1.0 / (4.0 * a.var_x)
        inv4b = 1.0 / (4.0 * b.var_x)
        alpha = (inv4a + inv4b) + 1j * (a.chirp - b.chirp)
        db = float(_LD(b.ledger.slope) - _LD(a.ledger.slope))
        beta = d * (inv4b - inv4a) + 1j * (db - (a.chirp + b.chirp) * d)
        gamma_re = -0.25 * d * d * (inv4a + inv4b)
        gamma_im_small = 0.25 * d * d * (b.chirp - a.chirp)
        # Term-by-term ledger difference in extended precision.
        big_phase = b.ledger.diff_constant(a.ledger) \
            + (_LD(b.ledger.slope) - _LD(a.ledger.slope)) * (_LD(x_mid) - _LD(a.ledger.x_ref))
        lam = wrap_angle(big_phase)
        norm_a = (2.0 * math.pi * a.var_x) ** -0.25
        norm_b = (2.0 * math.pi * b.var_x) ** -0.25
        z_int = np.sqrt(np.pi / alpha) * np.exp(beta * beta / (4.0 * alpha))
        self.overlap = complex(
            norm_a * norm_b
            * np.exp(gamma_re + 1j * (gamma_im_small + lam))
            * z_int
        )
        self._mu = complex(beta / (2.0 * alpha))
        self._s2 = complex(1.0 / (2.0 * alpha))
        self.off_a = 0.5 * d      # (x - X_a) = u + off_a
        self.off_b = -0.5 * d     # (x - X_b) = u + off_b

    def expect_u(self, coeffs) -> complex:
        """overlap * E[poly(u)] for poly given by ascending coeffs in u."""
        if self.orthogonal:
            return 0.0j
        mu, s2 = self._mu, self._s2
        # E[u^k] for the shifted complex Gaussian, k = 0..4.
        moments = (
            1.0,
            mu,
            mu * mu + s2,
            mu**3 + 3.0 * mu * s2,
            mu**4 + 6.0 * mu * mu * s2 + 3.0 * s2 * s2,
        )
        if len(coeffs) > len(moments):
            raise ValueError("pair moments implemented up to degree 4")
        acc = 0.0j
        for c, m_k in zip(coeffs, moments):
            acc += c * m_k
        return self.overlap * acc

    def braket(self, poly_a, poly_b) -> complex:
        """<P_a psi_a | P_b psi_b>, polys about each branch's own center.

        ``poly_a``/``poly_b`` are ascending coefficients in (x - X_a) and
        (x - X_b); conjugation of P_a is applied here.
        """
        if self.orthogonal:
            return 0.0j
        pa = _shift_poly([np.conj(c) for c in poly_a], self.off_a)
        pb = _shift_poly(list(poly_b), self.off_b)
        prod = np.convolve(pa, pb)
        return self.expect_u(prod)


def _shift_poly(coeffs: list[complex], off: float) -> np.ndarray:
    """Re-expand sum c_j t^j with t = u + off as a polynomial in u."""
    out = np.zeros(len(coeffs), dtype=complex)
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        for k in range(j + 1):
            out[k] += c * math.comb(j, k) * off ** (j - k)
    return out


def overlap(a: GaussianBranch, b: GaussianBranch) -> complex:
    """<a|b> of the unit-norm branch wavefunctions (amplitudes excluded).

    Zero across internal levels; includes envelope separation, linear
    and quadratic phases, and the extended-precision ledger difference.
    """
    return PairMoments(a, b).overlap


def state_norm_sq(state: ClockState) -> float:
    """Exact squared norm, amplitude-weighted with all cross overlaps."""
    total = 0.0j
    comps = state.components
    for j, a in enumerate(comps):
        total += abs(a.amplitude) ** 2
        for b in comps[j + 1:]:
            if a.internal_level != b.internal_level:
                continue
            total += 2.0 * (np.conj(a.amplitude) * b.amplitude * overlap(a, b)).real
    return float(total.real)


def wavefunction_values(branch: GaussianBranch, x: np.ndarray) -> np.ndarray:
    """Sample the unit-norm branch wavefunction on an array of positions.

    The per-point phase is assembled in extended precision (each ledger
    term reduced mod 2 pi separately) and wrapped before exponentiation.
    """
    x = np.asarray(x, dtype=float)
    const = branch.ledger.constant_wrapped()
    xl = x.astype(_LD)
    phase_ld = const + _LD(branch.ledger.slope) * (xl - _LD(branch.ledger.x_ref))
    dx = x - branch.mean_x
    phase = wrap_angle(np.mod(phase_ld, TWO_PI_LD)) + branch.chirp * dx * dx
    envelope = (2.0 * math.pi * branch.var_x) ** -0.25 \
        * np.exp(-dx * dx / (4.0 * branch.var_x))
    return envelope * np.exp(1j * phase)
