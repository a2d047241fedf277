"""Periodic control schedules and the decoupling condition machinery.

A schedule is a T-periodic control Hamiltonian H_c(t) that commutes with
the system Hamiltonian at all times. Two families are supported:

* smooth:   H_c(t) = (mu/T) * kappa(t/T) * H_dir with kappa 1-periodic,
* bangbang: a 1-periodic train of instantaneous kicks exp(i c_l H_dir)
            at phases alpha_l, with zero total weight per period.

Both are fully described by the accumulated control phase
phi(t) with V_c(t) = exp(i phi(t) H_dir), which is what every routine
below consumes. The decoupling checker evaluates the averaged coupling
over a period both as a running integral (residual) and through the
equivalent pair (periodicity of Q(t), vanishing zero Fourier mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.integrate
import scipy.optimize

from .errors import ArgumentError, DecouplingViolationError, TuneSearchError
from .operators import matrix_exp, operator_norm, spectral_decomposition

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "SystemModel",
    "ControlSchedule",
    "DDReport",
    "FourierTable",
    "vc_at",
    "q_of_t",
    "check_dd",
    "tune_amplitude",
    "fourier_modes",
    "qka_bangbang_closed_form",
    "effective_dynamics",
    "commutation_defect",
    "cosine_profile",
    "fourier_series_profile",
    "DD_TOL",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

#: default absolute tolerance on operator norms for the decoupling verdict
DD_TOL = 1e-7


def _hermitian(a, name):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ArgumentError(f"{name} must be square")
    if operator_norm(a - a.conj().T) > 1e-10 * max(1.0, operator_norm(a)):
        raise ArgumentError(f"{name} must be Hermitian")
    return a


@dataclass(frozen=True)
class SystemModel:
    """System Hamiltonian, coupling operator and the H_s eigen-decomposition."""

    h_s: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        h = _hermitian(self.h_s, "H_s")
        q = _hermitian(self.q, "Q")
        if h.shape != q.shape:
            raise ArgumentError("H_s and Q must act on the same space")
        object.__setattr__(self, "h_s", h)
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.h_s.shape[0]

    @property
    def spectrum(self):
        return spectral_decomposition(self.h_s)

    @property
    def energies(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.h_s)

    @classmethod
    def qubit(cls) -> "SystemModel":
        """Two-level system with gap 2 and transverse coupling."""
        return cls(SIGMA_Z.copy(), SIGMA_X.copy())


def cosine_profile():
    """1-periodic cosine profile with its exact antiderivative."""
    kappa = lambda x: np.cos(2 * np.pi * x)
    kappa_int = lambda x: np.sin(2 * np.pi * x) / (2 * np.pi)
    return kappa, kappa_int


def fourier_series_profile(cos_coeffs=(), sin_coeffs=()):
    """Truncated Fourier series profile with analytic antiderivative.

    kappa(x) = sum_m a_m cos(2 pi m x) + sum_m b_m sin(2 pi m x), m >= 1.
    The mean is left at zero so the antiderivative stays periodic.
    """
    a = np.asarray(cos_coeffs, dtype=float)
    b = np.asarray(sin_coeffs, dtype=float)
    ms_a = np.arange(1, len(a) + 1)
    ms_b = np.arange(1, len(b) + 1)

    def kappa(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, am in zip(ms_a, a):
            out = out + am * np.cos(2 * np.pi * m * x)
        for m, bm in zip(ms_b, b):
            out = out + bm * np.sin(2 * np.pi * m * x)
        return out

    def kappa_int(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for m, am in zip(ms_a, a):
            out = out + am * np.sin(2 * np.pi * m * x) / (2 * np.pi * m)
        for m, bm in zip(ms_b, b):
            out = out + bm * (1 - np.cos(2 * np.pi * m * x)) / (2 * np.pi * m)
        return out

    return kappa, kappa_int


@dataclass(frozen=True)
class ControlSchedule:
    """T-periodic control commuting with H_s, smooth or bang-bang."""

    period: float
    kind: str  # "smooth" | "bangbang"
    h_dir: np.ndarray
    mu: float = 0.0
    kappa: Optional[Callable] = field(default=None, repr=False)
    kappa_integral: Optional[Callable] = field(default=None, repr=False)
    kick_phases: Optional[np.ndarray] = None
    kick_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.period > 0:
            raise ArgumentError("period must be positive")
        object.__setattr__(self, "h_dir", _hermitian(self.h_dir, "H_dir"))
        if self.kind == "smooth":
            if self.kappa is None:
                raise ArgumentError("smooth schedule needs a profile kappa")
            if abs(float(self.kappa(0.0)) - float(self.kappa(1.0))) > 1e-12:
                raise ArgumentError("kappa must be 1-periodic: kappa(0) != kappa(1)")
            if self.kappa_integral is None:
                object.__setattr__(
                    self, "kappa_integral", _numeric_antiderivative(self.kappa)
                )
        elif self.kind == "bangbang":
            phases = np.asarray(self.kick_phases, dtype=float)
            weights = np.asarray(self.kick_weights, dtype=float)
            if phases.ndim != 1 or phases.shape != weights.shape:
                raise ArgumentError("kick phases/weights must be 1-d and congruent")
            if not np.all((phases > 0) & (phases < 1)):
                raise ArgumentError("kick phases must lie in (0, 1)")
            if not np.all(np.diff(phases) > 0):
                raise ArgumentError("kick phases must be strictly increasing")
            if abs(weights.sum()) > 1e-12:
                raise ArgumentError("kick weights must sum to zero")
            object.__setattr__(self, "kick_phases", phases)
            object.__setattr__(self, "kick_weights", weights)
        else:
            raise ArgumentError(f"unknown schedule kind {self.kind!r}")

    # -- factories ---------------------------------------------------------

    @classmethod
    def smooth(cls, period, mu, h_dir, kappa, kappa_integral=None):
        return cls(period=period, kind="smooth", h_dir=h_dir, mu=float(mu),
                   kappa=kappa, kappa_integral=kappa_integral)

    @classmethod
    def sinusoidal(cls, period, mu, h_dir=None):
        """The cosine-profile schedule of the standard qubit scenario."""
        kappa, kint = cosine_profile()
        if h_dir is None:
            h_dir = SIGMA_Z.copy()
        return cls.smooth(period, mu, h_dir, kappa, kint)

    @classmethod
    def bangbang(cls, period, phases, weights, h_dir=None):
        if h_dir is None:
            h_dir = SIGMA_Z.copy()
        return cls(period=period, kind="bangbang", h_dir=h_dir,
                   kick_phases=np.asarray(phases, float),
                   kick_weights=np.asarray(weights, float))

    @classmethod
    def off(cls, period=1.0, dim=2):
        """No forcing; useful as the uncontrolled baseline."""
        kappa, kint = cosine_profile()
        return cls.smooth(period, 0.0, np.zeros((dim, dim)), kappa, kint)

    # -- phase and Hamiltonian --------------------------------------------

    def phase(self, t):
        """Accumulated control phase phi(t): V_c(t) = exp(i phi(t) H_dir)."""
        t = np.asarray(t, dtype=float)
        x = t / self.period
        if self.kind == "smooth":
            n = np.floor(x)
            frac = x - n
            k1 = float(self.kappa_integral(1.0))
            return self.mu * (n * k1 + np.asarray(self.kappa_integral(frac), float))
        # bang-bang: count kicks with time strictly below t
        out = np.zeros_like(x)
        for a, c in zip(self.kick_phases, self.kick_weights):
            # kicks at x = j + a for integers j >= 0
            out = out + c * np.maximum(0.0, np.floor(x - a) + 1)
        return out

    def h_c(self, t):
        """Control Hamiltonian at time t (smooth schedules only)."""
        if self.kind != "smooth":
            raise ArgumentError("bang-bang control has no pointwise Hamiltonian")
        return (self.mu / self.period) * float(self.kappa(t / self.period)) * self.h_dir

    def max_control_norm(self, samples: int = 512) -> float:
        """max_t ||H_c(t)||; for kicks, the integrated weight per period / T."""
        if self.kind == "smooth":
            xs = np.linspace(0.0, 1.0, samples, endpoint=False)
            kmax = float(np.max(np.abs(np.asarray(self.kappa(xs), float))))
            return abs(self.mu) / self.period * kmax * operator_norm(self.h_dir)
        # delta kicks: report the L1 surrogate sum |c_l| ||H_dir|| / T
        return float(np.sum(np.abs(self.kick_weights))) * operator_norm(self.h_dir) / self.period

    def strength(self) -> float:
        """T * max_t ||H_c(t)||, the dimensionless control strength."""
        return self.period * self.max_control_norm()

    def rescaled(self, new_period: float) -> "ControlSchedule":
        """Same schedule on a different period (covariant rescaling)."""
        if self.kind == "smooth":
            return ControlSchedule.smooth(new_period, self.mu, self.h_dir,
                                          self.kappa, self.kappa_integral)
        return ControlSchedule.bangbang(new_period, self.kick_phases,
                                        self.kick_weights, self.h_dir)

    def segments(self):
        """Bang-bang: (start_x, end_x, phase) pieces covering one period."""
        if self.kind != "bangbang":
            raise ArgumentError("segments are only defined for bang-bang control")
        bounds = np.concatenate(([0.0], self.kick_phases, [1.0]))
        phis = np.concatenate(([0.0], np.cumsum(self.kick_weights)))
        return [(bounds[i], bounds[i + 1], phis[i]) for i in range(len(phis))]


def _numeric_antiderivative(kappa):
    """Antiderivative of a 1-periodic profile on a dense cached grid."""
    n = 1 << 14
    xs = np.linspace(0.0, 1.0, n + 1)
    vals = np.asarray(kappa(xs), dtype=float)
    cum = scipy.integrate.cumulative_trapezoid(vals, xs, initial=0.0)

    def kint(x):
        return np.interp(np.asarray(x, float), xs, cum)

    return kint


def commutation_defect(model: SystemModel, schedule: ControlSchedule,
                       samples: int = 64) -> float:
    """max ||[H_s, H_c(t)]|| over sample times (zero for admissible schedules)."""
    comm = model.h_s @ schedule.h_dir - schedule.h_dir @ model.h_s
    return operator_norm(comm)  # H_c(t) is a scalar multiple of H_dir at all t


def vc_at(schedule: ControlSchedule, t: float) -> np.ndarray:
    """Control propagator V_c(t) with V' = i H_c(t) V, V(0) = 1."""
    if t < 0:
        raise ArgumentError("t must be nonnegative")
    phi = float(schedule.phase(t))
    return matrix_exp(1j * phi * schedule.h_dir)


def q_of_t(model: SystemModel, schedule: ControlSchedule, t: float) -> np.ndarray:
    """Interaction-picture coupling V_c(t)* Q V_c(t)."""
    v = vc_at(schedule, t)
    return v.conj().T @ model.q @ v


def _q_samples(model, schedule, n):
    """Q(t) on a uniform grid over one period (vectorized for speed)."""
    ts = np.linspace(0.0, schedule.period, n, endpoint=False)
    phis = schedule.phase(ts)
    w, v = np.linalg.eigh(schedule.h_dir)
    qd = v.conj().T @ model.q @ v  # Q in the H_dir eigenbasis
    # Q(t)_mn = qd_mn * exp(-i phi (w_m - w_n)), rotated back
    dw = w[:, None] - w[None, :]
    qs = qd[None, :, :] * np.exp(-1j * phis[:, None, None] * dw[None, :, :])
    return ts, np.einsum("ab,tbc,dc->tad", v, qs, v.conj())


def _zero_mode_bangbang(model, schedule):
    total = np.zeros_like(model.q)
    for x0, x1, phi in schedule.segments():
        v = matrix_exp(1j * phi * schedule.h_dir)
        total = total + (x1 - x0) * (v.conj().T @ model.q @ v)
    return total


def _residual_bangbang(model, schedule, t0):
    """Exact integral of Q over [t0, t0 + T] for piecewise-constant phases."""
    T = schedule.period
    # collect kick times in [t0, t0+T]
    xs = [t0, t0 + T]
    j0 = math.floor(t0 / T) - 1
    for j in (j0, j0 + 1, j0 + 2, j0 + 3):
        for a in schedule.kick_phases:
            tk = (j + a) * T
            if t0 < tk < t0 + T:
                xs.append(tk)
    xs = np.array(sorted(xs))
    total = np.zeros_like(model.q)
    for lo, hi in zip(xs[:-1], xs[1:]):
        mid = 0.5 * (lo + hi)
        total = total + (hi - lo) * q_of_t(model, schedule, mid)
    return total


def _matrix_quad(fun, a, b, dim, epsabs=1e-10):
    """Entrywise adaptive quadrature of a matrix-valued function."""
    out = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            re, _ = scipy.integrate.quad(lambda s: fun(s)[i, j].real, a, b,
                                         epsabs=epsabs, limit=200)
            im, _ = scipy.integrate.quad(lambda s: fun(s)[i, j].imag, a, b,
                                         epsabs=epsabs, limit=200)
            out[i, j] = re + 1j * im
    return out


@dataclass(frozen=True)
class DDReport:
    """Decoupling check: running-integral residual and the equivalent pair."""

    residual: float
    periodicity_defect: float
    zero_mode_norm: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return (self.periodicity_defect < self.tolerance
                and self.zero_mode_norm < self.tolerance)

    @property
    def residual_passed(self) -> bool:
        # residual scales like T * ||Q_hat(0)||; normalize before comparing
        return self.residual < self.tolerance

    def __str__(self):
        verdict = "pass" if self.passed else "fail"
        return (f"DD {verdict}: residual={self.residual:.3e}, "
                f"periodicity defect={self.periodicity_defect:.3e}, "
                f"zero mode={self.zero_mode_norm:.3e} (tol {self.tolerance:.1e})")


def check_dd(model: SystemModel, schedule: ControlSchedule,
             tol: float = DD_TOL, base_points: int = 16) -> DDReport:
    """Verify the decoupling condition int_t^{t+T} Q(s) ds = 0.

    The residual is the max over ``base_points`` window offsets of the
    norm of the window integral (adaptive quadrature for smooth
    schedules, exact piecewise sums for kicks), normalized by the period
    so it is comparable with the zero-mode norm. The equivalent
    two-condition form (Q periodic, zero Fourier mode vanishing) is
    evaluated independently.
    """
    if not tol > 0:
        raise ArgumentError("tol must be positive")
    T = schedule.period
    d = model.dim
    residual = 0.0
    for t0 in np.linspace(0.0, T, base_points, endpoint=False):
        if schedule.kind == "bangbang":
            window = _residual_bangbang(model, schedule, float(t0))
        else:
            window = _matrix_quad(lambda s: q_of_t(model, schedule, s),
                                  float(t0), float(t0) + T, d)
        residual = max(residual, operator_norm(window) / T)

    defect = operator_norm(q_of_t(model, schedule, T) - model.q)
    if schedule.kind == "bangbang":
        zero_mode = _zero_mode_bangbang(model, schedule)
    else:
        _, qs = _q_samples(model, schedule, 4096)
        zero_mode = qs.mean(axis=0)
    return DDReport(residual=float(residual), periodicity_defect=float(defect),
                    zero_mode_norm=operator_norm(zero_mode), tolerance=tol)


def tune_amplitude(model: SystemModel, schedule_factory, bracket,
                   tol: float = 1e-8, scan_points: int = 33) -> float:
    """Find the amplitude at which the zero Fourier mode of Q vanishes.

    ``schedule_factory`` maps an amplitude to a ControlSchedule. The
    signed surrogate is the real part of the zero mode's dominant
    coupling entry, normalized to 1 at zero amplitude; a Brent root of
    the surrogate inside ``bracket`` is returned.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ArgumentError("bracket must be an increasing interval")
    # reference entry: the largest off-diagonal coupling element
    q = model.q
    off = np.abs(q - np.diag(np.diag(q)))
    i, j = np.unravel_index(np.argmax(off), off.shape)
    if off[i, j] == 0:
        raise ArgumentError("coupling operator has no off-diagonal part to tune")

    def surrogate(mu):
        sched = schedule_factory(mu)
        if sched.kind == "bangbang":
            zm = _zero_mode_bangbang(model, sched)
        else:
            _, qs = _q_samples(model, sched, 4096)
            zm = qs.mean(axis=0)
        return float((zm[i, j] / q[i, j]).real)

    mus = np.linspace(lo, hi, scan_points)
    vals = [surrogate(m) for m in mus]
    scan = list(zip(mus.tolist(), vals))
    for (m0, v0), (m1, v1) in zip(scan[:-1], scan[1:]):
        if v0 == 0.0:
            return m0
        if v0 * v1 < 0:
            mu_star = scipy.optimize.brentq(surrogate, m0, m1, xtol=1e-12, rtol=1e-15)
            if abs(surrogate(mu_star)) >= tol:
                raise TuneSearchError(
                    f"root at {mu_star} does not reduce the surrogate below {tol}",
                    scan=scan)
            return float(mu_star)
    raise TuneSearchError(
        f"no sign change of the zero-mode surrogate in [{lo}, {hi}]", scan=scan)


@dataclass(frozen=True)
class FourierTable:
    """Fourier modes of Q(t) and the two-level ladder modes."""

    cutoff: int
    modes: dict            # k -> matrix, |k| <= cutoff
    ladder: dict           # (k, a) -> matrix, a in {-1, +1}
    tail_bound: float
    parseval_defect: float
    period: float

    def mode(self, k: int) -> np.ndarray:
        return self.modes[k]

    def zero_mode_norm(self) -> float:
        return operator_norm(self.modes[0])


def _ladder_parts(model: SystemModel):
    """Upper/lower triangular coupling parts in the H_s eigenbasis (d=2)."""
    if model.dim != 2:
        raise ArgumentError("ladder modes are a two-level construct")
    q = model.q
    q_minus = np.array([[0, q[0, 1]], [0, 0]], dtype=complex)   # lowering side
    q_plus = np.array([[0, 0], [q[1, 0], 0]], dtype=complex)
    return {-1: q_minus, +1: q_plus}


def fourier_modes(model: SystemModel, schedule: ControlSchedule,
                  K: Optional[int] = None, samples: int = 4096,
                  tail_tol: float = 1e-12) -> FourierTable:
    """Fourier transform of the interaction-picture coupling.

    Smooth schedules use a uniform trapezoid rule (spectrally accurate
    for periodic integrands); bang-bang schedules are integrated exactly
    segment by segment. With ``K=None`` the cutoff grows until the
    mode-norm tail drops below ``tail_tol``.
    """
    if K is not None and K < 1:
        raise ArgumentError("K must be >= 1")
    T = schedule.period

    if schedule.kind == "bangbang":
        def mode_at(k):
            return _bangbang_mode(model.q, schedule, k)
        time_power = _bangbang_power(model, schedule)
    else:
        ts, qs = _q_samples(model, schedule, samples)
        phase_fac = np.exp(-2j * np.pi * np.arange(samples) / samples)

        def mode_at(k):
            w = phase_fac ** k
            return np.einsum("t,tij->ij", w, qs) / samples
        time_power = float(np.mean(np.abs(qs) ** 2) * model.dim**2)

    modes = {0: mode_at(0)}
    k = 0
    tail = np.inf
    if K is not None:
        k_max = K
    elif schedule.kind == "bangbang":
        # mode norms decay like 1/k, so the ring-power tail criterion can
        # never trigger; cap the table and report the analytic 1/K tail
        k_max = 64
    else:
        k_max = samples // 2 - 1
    recent = []
    while k < k_max:
        k += 1
        modes[k] = mode_at(k)
        modes[-k] = mode_at(-k)
        recent.append(float(np.sum(np.abs(modes[k]) ** 2)
                            + np.sum(np.abs(modes[-k]) ** 2)))
        if K is None and len(recent) >= 3:
            tail = sum(recent[-3:])
            if tail < tail_tol:
                break
    cutoff = k
    if schedule.kind == "bangbang" and recent:
        # sum_{k>K} C/k^2 ~ C/K with C = K^2 * ring(K)
        tail_bound = float(recent[-1] * cutoff)
    else:
        tail_bound = float(tail) if np.isfinite(tail) else float(
            sum(recent[-3:]) if recent else 0.0)

    mode_power = float(sum(np.sum(np.abs(m) ** 2) for m in modes.values()))
    parseval_defect = abs(mode_power - time_power)

    ladder = {}
    if model.dim == 2:
        parts = _ladder_parts(model)
        for a, qa in parts.items():
            if schedule.kind == "bangbang":
                for k in range(-cutoff, cutoff + 1):
                    ladder[(k, a)] = _bangbang_mode(qa, schedule, k)
            else:
                _, qat = _q_samples(_RawOperator(model.h_s, qa, schedule.h_dir),
                                    schedule, samples)
                coeffs = np.fft.fft(qat, axis=0) / samples
                for k in range(-cutoff, cutoff + 1):
                    ladder[(k, a)] = coeffs[k % samples]
    return FourierTable(cutoff=cutoff, modes=modes, ladder=ladder,
                        tail_bound=tail_bound, parseval_defect=float(parseval_defect),
                        period=T)


class _RawOperator:
    """Adapter so _q_samples can rotate a non-Hermitian ladder part."""

    def __init__(self, h_s, q, h_dir):
        self.h_s = h_s
        self.q = q
        self.dim = h_s.shape[0]


def _bangbang_mode(op: np.ndarray, schedule: ControlSchedule, k: int) -> np.ndarray:
    """Exact Fourier mode of V_c(t)* op V_c(t) for piecewise-constant phases."""
    total = np.zeros_like(np.asarray(op, complex))
    for x0, x1, phi in schedule.segments():
        v = matrix_exp(1j * phi * schedule.h_dir)
        piece = v.conj().T @ op @ v
        if k == 0:
            weight = x1 - x0
        else:
            w = 2j * np.pi * k
            weight = (np.exp(-w * x0) - np.exp(-w * x1)) / w
        total = total + weight * piece
    return total


def _bangbang_power(model, schedule) -> float:
    total = 0.0
    for x0, x1, phi in schedule.segments():
        v = matrix_exp(1j * phi * schedule.h_dir)
        piece = v.conj().T @ model.q @ v
        total += (x1 - x0) * float(np.sum(np.abs(piece) ** 2))
    return total


def qka_bangbang_closed_form(model: SystemModel, schedule: ControlSchedule,
                             k: int, a: int) -> np.ndarray:
    """Closed-form ladder Fourier mode for kick schedules.

    For k != 0 the mode is -(i / 2 pi k) * sum_l exp(-2 pi i alpha_l k) dQ_l,
    with dQ_l the jump of the rotated ladder part across kick l. The k = 0
    mode vanishes when the decoupling condition holds.
    """
    if schedule.kind != "bangbang":
        raise ArgumentError("closed form applies to bang-bang schedules only")
    if a not in (-1, +1):
        raise ArgumentError("a must be +1 or -1")
    qa = _ladder_parts(model)[a]
    if k == 0:
        zm = _zero_mode_bangbang(model, schedule)
        if operator_norm(zm) >= DD_TOL:
            raise DecouplingViolationError(
                "k=0 closed form requires the decoupling condition",
                zero_mode_norm=operator_norm(zm))
        return np.zeros_like(qa)
    segs = schedule.segments()
    total = np.zeros_like(qa)
    for l, (x0, x1, phi) in enumerate(segs[:-1]):
        v_before = matrix_exp(1j * phi * schedule.h_dir)
        v_after = matrix_exp(1j * segs[l + 1][2] * schedule.h_dir)
        jump = (v_after.conj().T @ qa @ v_after
                - v_before.conj().T @ qa @ v_before)
        alpha = x1  # kick sits at the segment boundary
        total = total + np.exp(-2j * np.pi * alpha * k) * jump
    return -1j / (2 * np.pi * k) * total


def effective_dynamics(model: SystemModel, schedule: ControlSchedule,
                       rho0: np.ndarray, t: float) -> np.ndarray:
    """Reservoir-free reference state e^{-itH_s} V_c(t)* rho0 V_c(t) e^{itH_s}."""
    rho0 = np.asarray(rho0, dtype=complex)
    _validate_state(rho0)
    v = vc_at(schedule, t)
    u = matrix_exp(-1j * t * model.h_s) @ v.conj().T
    return u @ rho0 @ u.conj().T


def _validate_state(rho, tol=1e-10):
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ArgumentError("state must be a square matrix")
    if operator_norm(rho - rho.conj().T) > tol:
        raise ArgumentError("state must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ArgumentError("state must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ArgumentError("state must be positive semidefinite")
