"""Quantum and classical Fisher information engines.

Three independent routes to the same quantities are provided and cross
checked against each other:

* closed forms (``qfi_ff_closed`` & friends), transcribed once from the
  analytic results and never tuned;
* a parametric pure-state engine (``qfi_pure_parametric``) that
  differentiates the Gaussian branch parameters and ledger coefficients
  by central finite differences and assembles
  ``G = 4 (<d psi|d psi> - |<psi|d psi>|^2)`` from closed-form pair
  moments -- no grids, no wrapped-phase differentiation;
* a mixed-state engine (``qfi_mixed_gram``) that diagonalizes the
  reduced density operator within the span of the ensemble states and
  evaluates the spectral-decomposition QFI formula.

Parameter conventions for the two interferometers:

* free fall estimates ``g`` (the slope of the linearized potential);
* the trapped Mach-Zehnder estimates ``delta_g = g_minus - g_plus`` or
  ``bar_g = (g_plus + g_minus)/2`` with the potential anchors held fixed.
"""

from __future__ import annotations

import cmath
import dataclasses
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import PhysicalParams
from .gaussian import (
    ClockState,
    GaussianBranch,
    PairMoments,
    evolve_state,
    make_initial_state,
    wrap_angle,
)

_LD = np.longdouble


class StepUnderflowError(ValueError):
    """Finite-difference step vanished in floating point."""


class NotIdentifiableError(ValueError):
    """The Fisher information is zero: no Cramer-Rao bound exists."""


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

_TARGETS = {
    "free_fall": ("g",),
    "mach_zehnder": ("delta_g", "bar_g"),
}


@dataclass(frozen=True)
class Scenario:
    """A parametrized state family: which interferometer, which parameter."""

    kind: str
    params: PhysicalParams
    target: str = "g"

    def __post_init__(self) -> None:
        if self.kind not in _TARGETS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.target not in _TARGETS[self.kind]:
            allowed = ", ".join(_TARGETS[self.kind])
            raise ValueError(
                f"target {self.target!r} not available for {self.kind!r} (use: {allowed})")

    def value(self) -> float:
        if self.target == "g":
            return self.params.g
        if self.target == "delta_g":
            return self.params.delta_g
        return self.params.bar_g

    def with_value(self, value: float) -> "Scenario":
        p = self.params
        if self.target == "g":
            new = p.replace(g=value)
        elif self.target == "delta_g":
            bar = p.bar_g
            new = p.replace(g_plus=bar - 0.5 * value, g_minus=bar + 0.5 * value)
        else:
            delta = p.delta_g
            new = p.replace(g_plus=value - 0.5 * delta, g_minus=value + 0.5 * delta)
        return dataclasses.replace(self, params=new)

    def make_state(self, value: float | None = None) -> ClockState:
        sc = self if value is None else self.with_value(value)
        return evolve_state(make_initial_state(sc.params), sc.params, sc.kind)

    def phase_scale(self) -> float:
        """Estimate of |d(interference phase)/d(target)|, rad per unit."""
        p = self.params
        if self.kind == "free_fall":
            return 2.0 * p.m * p.dt * p.h / p.hbar
        lever = abs(p.h_bar_mz) + abs(p.delta_h)
        return p.m * max(p.z0, p.z1) * p.dt * lever / p.hbar

    def detector_phase_scale(self) -> float:
        """Like phase_scale but for the detector-frame (clock-beat) phases."""
        p = self.params
        if self.kind == "free_fall":
            return 2.0 * p.m * max(p.z0, p.z1) * p.dt * p.h / p.hbar
        return self.phase_scale()


def _ordered_components(state: ClockState) -> tuple[GaussianBranch, ...]:
    """Deterministic component order, stable across parameter perturbations."""
    return tuple(sorted(state.components,
                        key=lambda b: (b.path_label, b.internal_level)))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def qfi_ff_closed(params: PhysicalParams) -> float:
    """Full-state QFI for g in free fall (three-term closed form).

    The middle term carries the clock-gravity coupling and is the sole
    source of the asymptotic dt^6 growth; with the coupling ablated the
    expression degrades gracefully to the dt^4 law (the first and last
    terms combine to (1/4) dt^4 / sigma^2 at long times).
    """
    p = params
    z0, z1 = p.z0_eff, p.z1_eff
    dz, zb = z1 - z0, 0.5 * (z0 + z1)
    mt = p.m * p.dt / p.hbar
    sig2 = p.spread_width**2
    first = 0.5 * ((1.0 + z0) ** 2 + (1.0 + z1) ** 2) * mt * mt * (4.0 * sig2 + p.h**2)
    middle = (mt * dz) ** 2 * (p.g * p.dt**2 / 6.0 + p.h_bar) ** 2
    last = (zb + 0.75) * p.dt**4 / p.sigma**2
    return first + middle - last


def qfi_ff_asymptotic(params: PhysicalParams) -> float:
    """Long-time limit of the free-fall QFI: g^2 dE^2 dt^6 / (36 hbar^2 c^4)."""
    p = params
    return (p.g * p.delta_e_eff * p.dt**3) ** 2 / (36.0 * p.hbar**2 * p.c**4)


def qfi_ff_reduced_closed(params: PhysicalParams) -> float:
    """QFI of the path-only (clock traced out) state, qubit approximation."""
    p = params
    dz, zb = p.delta_z_eff, p.z_bar_eff
    a = p.m * dz * p.dt * p.h / (2.0 * p.hbar)
    b = p.m * p.dt * p.h * (1.0 + zb) / p.hbar
    arg = p.m * dz * p.delta_v_ff * p.dt / (2.0 * p.hbar)
    return a * a + b * b * math.cos(arg) ** 2


def fi_ff_closed(params: PhysicalParams) -> float:
    """FI of the path-interference measurement: (dE h dt / 2 hbar c^2)^2."""
    p = params
    return (p.delta_e_eff * p.h * p.dt / (2.0 * p.hbar * p.c**2)) ** 2


def _mz_energies(params: PhysicalParams) -> tuple[float, float]:
    c2 = params.c**2
    return params.z0_eff * params.m * c2, params.z1_eff * params.m * c2


def qfi_mz_closed(params: PhysicalParams, target: str) -> float:
    """Full-state Mach-Zehnder QFI for delta_g or bar_g.

    Both vanish identically when the internal energies are zero: the
    trapped geometry is sensitive to gravity only through time dilation.
    """
    p = params
    e0, e1 = _mz_energies(p)
    sum_sq = e0 * e0 + e1 * e1
    de = e1 - e0
    sig2 = p.spread_width**2
    hc2 = p.hbar * p.c**2
    if target == "delta_g":
        return (p.dt / (4.0 * hc2)) ** 2 * (
            sum_sq * 8.0 * (sig2 + p.h_bar_mz**2) + de * de * p.delta_h**2)
    if target == "bar_g":
        return (p.dt / (math.sqrt(2.0) * hc2)) ** 2 * (
            sum_sq * (4.0 * sig2 + p.delta_h**2) + 2.0 * de * de * p.h_bar_mz**2)
    raise ValueError(f"unknown MZ target {target!r}")


def qfi_mz_reduced_closed(params: PhysicalParams, target: str) -> float:
    """Reduced-state Mach-Zehnder QFI (path-only, qubit approximation)."""
    p = params
    e0, e1 = _mz_energies(p)
    de, e_bar = e1 - e0, 0.5 * (e0 + e1)
    hc2 = p.hbar * p.c**2
    if target == "delta_g":
        lever = p.h_bar_mz
    elif target == "bar_g":
        lever = p.delta_h
    else:
        raise ValueError(f"unknown MZ target {target!r}")
    arg = de * p.delta_v_mz * p.dt / (2.0 * hc2)
    return (de * lever * p.dt / (2.0 * hc2)) ** 2 \
        + (e_bar * lever * p.dt / hc2) ** 2 * math.cos(arg) ** 2


def fi_mz_closed(params: PhysicalParams, target: str) -> float:
    """Measurement FI for the Mach-Zehnder: note the crossed levers.

    delta_g is read through the mean offset h_bar_mz, bar_g through the
    offset difference delta_h.
    """
    p = params
    e0, e1 = _mz_energies(p)
    de = e1 - e0
    hc2 = p.hbar * p.c**2
    if target == "delta_g":
        return (de * p.h_bar_mz * p.dt / (2.0 * hc2)) ** 2
    if target == "bar_g":
        return (de * p.delta_h * p.dt / (2.0 * hc2)) ** 2
    raise ValueError(f"unknown MZ target {target!r}")


def cramer_rao(fisher: float, n_measurements: int = 1) -> float:
    """Single- or multi-shot Cramer-Rao variance bound, 1/(M F)."""
    if n_measurements < 1:
        raise ValueError("n_measurements must be at least 1")
    if fisher < 0:
        raise ValueError("Fisher information cannot be negative")
    if fisher == 0:
        raise NotIdentifiableError("parameter not identifiable: zero Fisher information")
    return 1.0 / (n_measurements * fisher)


def closed_qfi(scenario: Scenario) -> float:
    if scenario.kind == "free_fall":
        return qfi_ff_closed(scenario.params)
    return qfi_mz_closed(scenario.params, scenario.target)


def closed_reduced_qfi(scenario: Scenario) -> float:
    if scenario.kind == "free_fall":
        return qfi_ff_reduced_closed(scenario.params)
    return qfi_mz_reduced_closed(scenario.params, scenario.target)


def closed_fi(scenario: Scenario) -> float:
    if scenario.kind == "free_fall":
        return fi_ff_closed(scenario.params)
    return fi_mz_closed(scenario.params, scenario.target)


# ---------------------------------------------------------------------------
# Parametric pure-state QFI
# ---------------------------------------------------------------------------

def _fd_step(value: float, rel_step: float) -> float:
    step = max(rel_step * abs(value), 1e-9)
    if value + step == value or value - step == value:
        raise StepUnderflowError(
            f"relative step {rel_step:g} underflows at value {value:g}; "
            "pass an absolute step via rel_step = step/|value|")
    return step


def _branch_fields(state: ClockState):
    comps = _ordered_components(state)
    return comps


def _parametric_qfi_at(scenario: Scenario, v0: float, step: float) -> float:
    lo = scenario.make_state(v0 - step)
    hi = scenario.make_state(v0 + step)
    mid = scenario.make_state(v0)
    two_h = _LD((v0 + step) - (v0 - step))

    comps = _branch_fields(mid)
    comps_lo = _branch_fields(lo)
    comps_hi = _branch_fields(hi)

    damp, dmean, dvar, dchirp, dslope, dconst = [], [], [], [], [], []
    for b_lo, b_hi, b in zip(comps_lo, comps_hi, comps):
        damp.append((b_hi.amplitude - b_lo.amplitude) / float(two_h))
        dmean.append((b_hi.mean_x - b_lo.mean_x) / float(two_h))
        dvar.append((b_hi.var_x - b_lo.var_x) / float(two_h))
        dchirp.append((b_hi.chirp - b_lo.chirp) / float(two_h))
        dslope.append((_LD(b_hi.ledger.slope) - _LD(b_lo.ledger.slope)) / two_h)
        names = set(b_hi.ledger.term_names()) | set(b_lo.ledger.term_names())
        t_hi, t_lo = dict(b_hi.ledger.terms), dict(b_lo.ledger.terms)
        total = _LD(0.0)
        for name in sorted(names):
            total = total + (_LD(t_hi.get(name, 0.0)) - _LD(t_lo.get(name, 0.0)))
        dconst.append(total / two_h)

    # Constant phase derivative per component, including the slope pivot.
    phase0 = [dc + ds * (_LD(b.mean_x) - _LD(b.ledger.x_ref))
              for dc, ds, b in zip(dconst, dslope, comps)]
    weights = [abs(b.amplitude) ** 2 for b in comps]
    wsum = sum(weights)
    gauge = sum((_LD(w) * p0 for w, p0 in zip(weights, phase0)), _LD(0.0)) / _LD(wsum)

    polys = []
    for k, b in enumerate(comps):
        c0 = -dvar[k] / (4.0 * b.var_x) + 1j * float(phase0[k] - gauge)
        c1 = dmean[k] * (1.0 / (2.0 * b.var_x) - 2j * b.chirp) + 1j * float(dslope[k])
        c2 = dvar[k] / (4.0 * b.var_x**2) + 1j * dchirp[k]
        polys.append((
            damp[k] + b.amplitude * c0,
            b.amplitude * c1,
            b.amplitude * c2,
        ))

    s_dd = 0.0j
    s_pd = 0.0j
    for j, bj in enumerate(comps):
        for k, bk in enumerate(comps):
            pm = PairMoments(bj, bk)
            if pm.orthogonal:
                continue
            s_dd += pm.braket(polys[j], polys[k])
            s_pd += pm.braket([bj.amplitude], polys[k])
    return 4.0 * (s_dd.real - abs(s_pd) ** 2)


def qfi_pure_parametric(scenario: Scenario, value: float | None = None,
                        rel_step: float = 1e-5) -> float:
    """Pure-state QFI of the scenario family by parameter differentiation.

    Central differences of every Gaussian parameter and ledger term
    (extended precision for the phase coefficients), Richardson
    extrapolated over steps h and h/2.  The controllable phase enters as
    a parameter-independent amplitude, so the result is invariant in it.
    """
    v0 = scenario.value() if value is None else value
    step = _fd_step(v0, rel_step)
    g_full = _parametric_qfi_at(scenario, v0, step)
    g_half = _parametric_qfi_at(scenario, v0, 0.5 * step)
    return (4.0 * g_half - g_full) / 3.0


# ---------------------------------------------------------------------------
# Qubit reduction and the mixed-state (spectral) QFI
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitModel:
    """Semiclassical two-path model: each branch reduced to a pure phase.

    gamma[i] is the minus-vs-plus relative phase of level i evaluated at
    the clock-free trajectory centers (global per-level phases dropped);
    widths and position dependence are discarded.
    """

    gammas: tuple[float, float]

    def vectors(self) -> np.ndarray:
        out = np.empty((2, 2), dtype=complex)
        for i, gamma in enumerate(self.gammas):
            out[i] = (1.0 / math.sqrt(2.0), cmath.exp(1j * gamma) / math.sqrt(2.0))
        return out


def reduce_to_qubit(state: ClockState, params: PhysicalParams,
                    scenario: str = "free_fall") -> QubitModel:
    """Collapse each branch to a phase at the z-free trajectory center."""
    if len(state.components) != 4:
        raise ValueError("qubit reduction expects the 4-component interferometer state")
    # Evaluation points in extended precision: the fall distance dwarfs the
    # branch separation, so forming x_s - g dt^2/2 in float64 would lose
    # the very digits the path difference lives in.
    if scenario == "free_fall":
        drop = 0.5 * _LD(params.g) * _LD(params.dt) ** 2
    else:
        drop = _LD(0.0)
    x_plus_eval = _LD(params.x_plus) - drop
    x_minus_eval = _LD(params.x_minus) - drop
    gammas = []
    for level in (0, 1):
        bp = state.branch("plus", level)
        bm = state.branch("minus", level)
        rel = bm.ledger.diff_at(x_minus_eval, bp.ledger, x_plus_eval)
        rel = rel + _LD(bm.chirp) * (_LD(x_minus_eval) - _LD(bm.mean_x)) ** 2
        rel = rel - _LD(bp.chirp) * (_LD(x_plus_eval) - _LD(bp.mean_x)) ** 2
        amp_phase = cmath.phase(bm.amplitude) - cmath.phase(bp.amplitude)
        gammas.append(wrap_angle(rel + _LD(amp_phase)))
    return QubitModel((gammas[0], gammas[1]))


def reduced_qubit_ensemble(scenario: Scenario):
    """Ensemble function v -> [(1/2, |phi_0>), (1/2, |phi_1>)] as qubit vectors."""
    def at(value: float):
        sc = scenario.with_value(value)
        qm = reduce_to_qubit(sc.make_state(), sc.params, sc.kind)
        vec = qm.vectors()
        return ((0.5, vec[0]), (0.5, vec[1]))
    return at


def _aligned_eigh(rho: np.ndarray, ref: np.ndarray | None, cluster_tol: float = 1e-8):
    w, v = np.linalg.eigh(rho)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    if ref is not None:
        start = 0
        while start < len(w):
            stop = start + 1
            while stop < len(w) and abs(w[stop - 1] - w[stop]) < cluster_tol:
                stop += 1
            block = slice(start, stop)
            a = v[:, block].conj().T @ ref[:, block]
            u, _, vh = np.linalg.svd(a)
            v[:, block] = v[:, block] @ (u @ vh)
            start = stop
    return w, v


def _gram_qfi_at(ensemble_fn, v0: float, step: float, eigen_floor: float) -> float:
    def rho_of(value: float):
        members = ensemble_fn(value)
        dim = len(members[0][1])
        rho = np.zeros((dim, dim), dtype=complex)
        for p_i, vec in members:
            vec = np.asarray(vec, dtype=complex)
            rho += p_i * np.outer(vec, vec.conj())
        return rho

    w_c, e_c = _aligned_eigh(rho_of(v0), None)
    w_p, e_p = _aligned_eigh(rho_of(v0 + step), e_c)
    w_m, e_m = _aligned_eigh(rho_of(v0 - step), e_c)
    two_h = (v0 + step) - (v0 - step)
    dw = (w_p - w_m) / two_h
    de = (e_p - e_m) / two_h

    dropped = []
    total = 0.0
    for k, wk in enumerate(w_c):
        if wk < eigen_floor:
            dropped.append(k)
            continue
        total += dw[k] ** 2 / wk
        total += 4.0 * wk * float(np.vdot(de[:, k], de[:, k]).real)
    for k, wk in enumerate(w_c):
        for l, wl in enumerate(w_c):
            if wk + wl < eigen_floor:
                continue
            ov = np.vdot(de[:, k], e_c[:, l])
            total -= 8.0 * wk * wl / (wk + wl) * abs(ov) ** 2
    if dropped:
        warnings.warn(f"gram QFI dropped eigenvalues below {eigen_floor:g}: {dropped}",
                      stacklevel=3)
    return total


def qfi_mixed_gram(ensemble_fn, value: float, rel_step: float = 1e-5,
                   phase_scale: float | None = None,
                   eigen_floor: float = 1e-12) -> float:
    """Mixed-state QFI of an ensemble v -> [(p_i, |psi_i(v)>)].

    The density operator is diagonalized within the span of the ensemble
    (the members need not be orthogonal), eigenvectors are gauge- and
    degeneracy-aligned to the central ones, and the three spectral sums
    of the mixed-state QFI are evaluated with central differences,
    Richardson extrapolated.

    Amplitude-level differentiation needs phase-aware steps: when
    ``phase_scale`` (rad per parameter unit) is given, the step targets a
    ~0.01 rad rotation regardless of |value|, since interference phases
    oscillate on their own scale, not on the parameter's magnitude.
    """
    if phase_scale is not None and phase_scale > 0:
        step = 1e-2 / phase_scale
        if value + step == value or not math.isfinite(step):
            raise StepUnderflowError("phase-targeted step unusable; check phase_scale")
    else:
        step = _fd_step(value, rel_step)
    g_full = _gram_qfi_at(ensemble_fn, value, step, eigen_floor)
    g_half = _gram_qfi_at(ensemble_fn, value, 0.5 * step, eigen_floor)
    return (4.0 * g_half - g_full) / 3.0


def reduced_qfi_gram(scenario: Scenario, rel_step: float = 1e-5) -> float:
    """Mixed-state QFI of the clock-traced interferometer state."""
    return qfi_mixed_gram(
        reduced_qubit_ensemble(scenario),
        scenario.value(),
        rel_step=rel_step,
        phase_scale=scenario.phase_scale(),
    )


# ---------------------------------------------------------------------------
# Detection probabilities and the classical FI
# ---------------------------------------------------------------------------

def detection_probabilities(state: ClockState, params: PhysicalParams,
                            scenario: str = "free_fall") -> tuple[float, float]:
    """Click probabilities of the path-interference detectors.

    The detectors are the clock-free evolved branches interfered with a
    +/- sign, so every phase that does not originate from time dilation
    is projected away; what survives per level i is the detector-frame
    relative phase, and

        P_pm = 1/2 +- (cos g0 + cos g1) / 4.

    Computed by term-by-term ledger subtraction against a clock-free
    reference evolution; P_plus + P_minus = 1 exactly by construction.
    """
    ref_params = params.replace(e0=0.0, e1=0.0)
    ref_state = evolve_state(make_initial_state(ref_params), ref_params, scenario)
    if scenario == "free_fall":
        drop = 0.5 * _LD(params.g) * _LD(params.dt) ** 2
    else:
        drop = _LD(0.0)
    x_p, x_m = _LD(params.x_plus) - drop, _LD(params.x_minus) - drop
    ref_rel = ref_state.branch("minus", 0).ledger.diff_at(
        x_m, ref_state.branch("plus", 0).ledger, x_p)
    cos_sum = 0.0
    for level in (0, 1):
        bp = state.branch("plus", level)
        bm = state.branch("minus", level)
        rel = bm.ledger.diff_at(x_m, bp.ledger, x_p)
        amp_phase = cmath.phase(bm.amplitude) - cmath.phase(bp.amplitude)
        cos_sum += math.cos(wrap_angle(rel - ref_rel + _LD(amp_phase)))
    p_plus = 0.5 + 0.25 * cos_sum
    return p_plus, 1.0 - p_plus


def _fi_at(prob_fn, value: float, step: float) -> float:
    p_c = np.asarray(prob_fn(value), dtype=float)
    p_hi = np.asarray(prob_fn(value + step), dtype=float)
    p_lo = np.asarray(prob_fn(value - step), dtype=float)
    for arr in (p_c, p_hi, p_lo):
        if np.any(arr < 0):
            raise ValueError("probability function returned a negative probability")
        if abs(arr.sum() - 1.0) > 1e-8:
            raise ValueError("outcome distribution does not sum to 1")
    two_h = (value + step) - (value - step)
    dp = (p_hi - p_lo) / two_h
    keep = p_c >= 1e-15
    if not np.all(keep):
        warnings.warn(
            f"classical FI excluded outcomes below 1e-15: {np.where(~keep)[0].tolist()}",
            stacklevel=3)
    return float(np.sum(dp[keep] ** 2 / p_c[keep]))


def classical_fi(prob_fn, value: float, rel_step: float = 1e-5,
                 step: float | None = None) -> float:
    """FI of a finite outcome distribution by central differences.

    ``step`` overrides the relative-step policy with an absolute one
    (needed when the distribution varies on a scale unrelated to |value|).
    """
    if step is None:
        step = _fd_step(value, rel_step)
    elif value + step == value or not math.isfinite(step):
        raise StepUnderflowError(f"absolute step {step:g} unusable at value {value:g}")
    f_full = _fi_at(prob_fn, value, step)
    f_half = _fi_at(prob_fn, value, 0.5 * step)
    return (4.0 * f_half - f_full) / 3.0


def fi_numeric(scenario: Scenario, rel_step: float = 1e-5) -> float:
    """Numeric FI of the detection probabilities for the scenario target."""
    def prob_fn(value: float):
        sc = scenario.with_value(value)
        return detection_probabilities(sc.make_state(), sc.params, sc.kind)
    dps = scenario.detector_phase_scale()
    step = 1e-2 / dps if dps > 0 else None
    return classical_fi(prob_fn, scenario.value(), rel_step=rel_step, step=step)


def quadrature_phi(params: PhysicalParams, scenario: str = "free_fall") -> float:
    """Phase-shifter setting that parks the slow cosine at an extremum.

    There the measurement's sensitivity comes entirely from the
    time-dilation beat and the numeric FI meets the closed form.
    """
    dv = params.delta_v_ff if scenario == "free_fall" else params.delta_v_mz
    slow = params.e_bar_eff * dv * params.dt / (params.hbar * params.c**2)
    return -wrap_angle(_LD(slow))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class EstimationReport:
    """Per-method estimation results for one scenario point."""

    parameter_name: str
    qfi_closed: float | None = None
    qfi_parametric: float | None = None
    qfi_oracle: float | None = None
    qfi_reduced: float | None = None
    fi_closed: float | None = None
    fi_numeric: float | None = None
    crb_single_shot: float | None = None
    method_metadata: dict = dataclasses.field(default_factory=dict)

    def finalize(self) -> "EstimationReport":
        if self.qfi_closed is not None and self.qfi_closed > 0:
            self.crb_single_shot = 1.0 / self.qfi_closed
        return self

    def to_json(self) -> str:
        payload = {
            "parameter_name": self.parameter_name,
            "qfi_closed": self.qfi_closed,
            "qfi_parametric": self.qfi_parametric,
            "qfi_oracle": self.qfi_oracle,
            "qfi_reduced": self.qfi_reduced,
            "fi_closed": self.fi_closed,
            "fi_numeric": self.fi_numeric,
            "crb_single_shot": self.crb_single_shot,
            "method_metadata": self.method_metadata,
        }
        return json.dumps(payload, indent=2, sort_keys=True)
