"""
   Copyright 2024 obsideband contributors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""
"""
Time-domain integration of the mean-field Bloch equations with the self-consistent polarization field.

This is the independent oracle for the resonant and sideband solvers.  The real state vector used throughout is
``y = (Re sm, Im sm, s0)``.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from obsideband.errors import HarmonicsError, IntegrationError, SettleError
from obsideband.params import ModelParams

logger = logging.getLogger(__name__)

# output samples per drive period when integrating a periodically driven system
_samples_per_period = 64
# output samples for a resonant (epsilon = 0) trajectory
_resonant_samples = 256


@dataclass(frozen=True)
class AtomicState:
    """Mean-field Bloch variables of a single atom."""

    s0: float
    """ Population inversion. """

    sm: complex = 0j
    """ Atomic coherence. """

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "AtomicState":
        """Create from a real ``(Re sm, Im sm, s0)`` vector."""
        return cls(s0=float(y[2]), sm=complex(y[0], y[1]))

    def to_vector(self) -> np.ndarray:
        """Return the real ``(Re sm, Im sm, s0)`` vector."""
        return np.array([self.sm.real, self.sm.imag, self.s0])

    @property
    def bloch_norm(self) -> float:
        """``s0**2 + 4|sm|**2``, at most 1 for a physical state."""
        return self.s0**2 + 4 * abs(self.sm) ** 2


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution of the Bloch equations at a fixed input field."""

    times: np.ndarray
    s0: np.ndarray
    sm: np.ndarray
    fields_total: np.ndarray
    """ Total effective field ``e_in + lambda_c * conj(sm) / mu`` at each sample. """
    e_in: complex

    def __post_init__(self):
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        s0 = np.atleast_1d(np.asarray(self.s0, dtype=float))
        sm = np.atleast_1d(np.asarray(self.sm, dtype=complex))
        fields_total = np.atleast_1d(np.asarray(self.fields_total, dtype=complex))
        if not (len(times) == len(s0) == len(sm) == len(fields_total)) or len(times) == 0:
            raise ValueError("Trajectory arrays must be non-empty and of equal length.")
        if np.any(np.diff(times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing.")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "s0", s0)
        object.__setattr__(self, "sm", sm)
        object.__setattr__(self, "fields_total", fields_total)
        object.__setattr__(self, "e_in", complex(self.e_in))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def states(self) -> List[AtomicState]:
        """Samples as a list of :class:`AtomicState`."""
        return [AtomicState(s0=float(s0), sm=complex(sm)) for s0, sm in zip(self.s0, self.sm)]

    @property
    def final_state(self) -> AtomicState:
        """The last sample."""
        return AtomicState(s0=float(self.s0[-1]), sm=complex(self.sm[-1]))

    @property
    def bloch_norm(self) -> np.ndarray:
        """``s0**2 + 4|sm|**2`` at each sample."""
        return self.s0**2 + 4 * np.abs(self.sm) ** 2


@dataclass(frozen=True)
class HarmonicSolution:
    """Fourier coefficients of a settled orbit, keyed by harmonic index."""

    n_max: int
    a: Dict[int, complex] = field(repr=False)
    """ Harmonics of the coherence ``sm``. """
    b: Dict[int, complex] = field(repr=False)
    """ Harmonics of the inversion ``s0``. """
    modes: Dict[int, complex] = field(repr=False)
    """ Output field mode amplitudes. """
    e_in: complex = 0j


def ground_state(params: ModelParams) -> AtomicState:
    """The undriven fixed point ``(-1 / cosh(2r), 0)``."""
    return AtomicState(s0=-1.0 / params.derived.cosh2r, sm=0j)


def total_field(sm, e_in: complex, params: ModelParams):
    """Total effective field seen by an atom with coherence ``sm`` (scalar or array)."""
    return e_in + params.derived.lambda_c * np.conj(sm) / params.mu


def rhs_vector(t: float, y: np.ndarray, e_in: complex, params: ModelParams) -> np.ndarray:
    """
    Time derivative of the real state vector ``(Re sm, Im sm, s0)``.

    Parameters
    ----------
    t: float
        Time.
    y: numpy.ndarray
        State vector ``(Re sm, Im sm, s0)``.
    e_in: complex
        Input field amplitude.
    params: ModelParams
        Model parameters.

    Returns
    -------
    numpy.ndarray
        ``(d Re sm / dt, d Im sm / dt, d s0 / dt)``.
    """
    derived = params.derived
    sm = complex(y[0], y[1])
    s0 = y[2]
    # Rabi drive: mu times the total field, including the polarization feedback
    drive = params.mu * e_in + derived.lambda_c * sm.conjugate()
    q_t = derived.q * cmath.exp(1j * params.epsilon * t) if params.epsilon != 0 else derived.q
    dsm = -1j * derived.omega_c * sm + 1j * drive.conjugate() * s0 - q_t * sm.conjugate()
    ds0 = -4 * (drive * sm).imag - params.gamma * (derived.cosh2r * s0 + 1)
    return np.array([dsm.real, dsm.imag, ds0])


def rhs(t: float, state: AtomicState, e_in: complex, params: ModelParams) -> AtomicState:
    """
    Time derivative of the Bloch variables.

    Returns an :class:`AtomicState` holding ``(ds0/dt, dsm/dt)``.
    """
    return AtomicState.from_vector(rhs_vector(t, state.to_vector(), e_in, params))


def jacobian(t: float, y: np.ndarray, e_in: complex, params: ModelParams) -> np.ndarray:
    """
    Analytic Jacobian of :func:`rhs_vector` with respect to ``(Re sm, Im sm, s0)``.

    The dependence of the total field on ``sm`` through the polarization feedback is included.  Derivatives are
    formed with respect to ``sm`` and ``conj(sm)``, then combined into the real variables.
    """
    derived = params.derived
    sm = complex(y[0], y[1])
    s0 = y[2]
    lam = derived.lambda_c
    drive = params.mu * e_in + lam * sm.conjugate()
    q_t = derived.q * cmath.exp(1j * params.epsilon * t) if params.epsilon != 0 else derived.q

    # coherence equation
    g_sm = -1j * derived.omega_c + 1j * lam.conjugate() * s0
    g_smc = -q_t
    g_s0 = 1j * drive.conjugate()
    # inversion equation
    h_sm = 2j * (drive - lam.conjugate() * sm.conjugate())
    h_smc = 2j * (lam * sm - drive.conjugate())

    g_u, g_v = g_sm + g_smc, 1j * (g_sm - g_smc)
    h_u, h_v = h_sm + h_smc, 1j * (h_sm - h_smc)
    return np.array(
        [
            [g_u.real, g_v.real, g_s0.real],
            [g_u.imag, g_v.imag, g_s0.imag],
            [h_u.real, h_v.real, -params.gamma * derived.cosh2r],
        ]
    )


def solve_ode(
    fun: Callable, t_span: tuple, y0: np.ndarray, tol: float, t_eval: Optional[np.ndarray] = None
):
    """Run ``solve_ivp`` and raise :class:`IntegrationError` on failure or a non-finite state."""
    sol = solve_ivp(fun, t_span, y0, method="DOP853", rtol=tol, atol=tol * 1e-3, t_eval=t_eval)
    if sol.status < 0:
        t_fail = float(sol.t[-1]) if len(sol.t) > 0 else float(t_span[0])
        raise IntegrationError(f"Integration failed: {sol.message}", t_fail)
    finite = np.all(np.isfinite(sol.y), axis=0)
    if not np.all(finite):
        raise IntegrationError("Non-finite state", float(sol.t[np.argmin(finite)]))
    return sol


def _propagate(y0: np.ndarray, e_in: complex, params: ModelParams, t0: float, t1: float, tol: float) -> np.ndarray:
    """Return the state at ``t1`` starting from ``y0`` at ``t0``."""
    sol = solve_ode(lambda t, y: rhs_vector(t, y, e_in, params), (t0, t1), y0, tol)
    return sol.y[:, -1]


def _trajectory(times, ys: np.ndarray, e_in: complex, params: ModelParams) -> Trajectory:
    """Build a :class:`Trajectory` from a ``(3, n)`` array of state vectors."""
    sm = ys[0] + 1j * ys[1]
    return Trajectory(times=times, s0=ys[2], sm=sm, fields_total=total_field(sm, e_in, params), e_in=e_in)


def integrate(
    initial: AtomicState,
    e_in: complex,
    params: ModelParams,
    t_end: float,
    tol: float = 1e-10,
    t_start: float = 0.0,
    samples: Optional[int] = None,
) -> Trajectory:
    """
    Integrate the Bloch equations with an adaptive step.

    Parameters
    ----------
    initial: AtomicState
        State at ``t_start``.
    e_in: complex
        Input field amplitude.
    params: ModelParams
        Model parameters.
    t_end: float
        End time.
    tol: float, optional
        Local relative error tolerance of the integrator.
    t_start: float, optional
        Start time.  The drive phase is referenced to t = 0, not ``t_start``.
    samples: int, optional
        Number of uniform output intervals.  Defaults to 64 per drive period, or 256 for the resonant problem.

    Returns
    -------
    Trajectory
        Uniformly sampled trajectory, including both end points.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    if t_end <= t_start:
        raise ValueError(f"t_end ({t_end}) must be greater than t_start ({t_start})")
    if samples is None:
        if params.epsilon != 0:
            samples = max(2, math.ceil(_samples_per_period * (t_end - t_start) / params.period))
        else:
            samples = _resonant_samples
    t_eval = np.linspace(t_start, t_end, samples + 1)
    sol = solve_ode(
        lambda t, y: rhs_vector(t, y, e_in, params), (t_start, t_end), initial.to_vector(), tol, t_eval=t_eval
    )
    return _trajectory(sol.t, sol.y, e_in, params)


def _fixed_point_trajectory(y: np.ndarray, t: float, e_in: complex, params: ModelParams) -> Trajectory:
    return _trajectory(np.array([t]), y.reshape(3, 1), e_in, params)


def settle(
    e_in: complex,
    params: ModelParams,
    settle_tol: float = 1e-9,
    max_periods: int = 5000,
    tol: float = 1e-10,
    initial: Optional[AtomicState] = None,
    samples: int = 512,
) -> Trajectory:
    """
    Integrate until the trajectory settles on a periodic orbit (or a fixed point), and return it.

    For a non-zero ``epsilon``, stroboscopic samples one drive period apart are compared until they differ by less
    than ``settle_tol`` (max norm); exactly one further period is then returned, sampled at ``samples + 1`` uniform
    times.  For ``epsilon = 0``, or when the initial state is already stationary, integration continues until the
    derivative norm is below ``settle_tol`` and the fixed point is returned as a one-sample trajectory.

    Parameters
    ----------
    e_in: complex
        Input field amplitude.
    params: ModelParams
        Model parameters.
    settle_tol: float, optional
        Convergence threshold on the stroboscopic (or derivative) max norm.
    max_periods: int, optional
        Maximum number of drive periods (resonant problem: damping times ``2*pi/gamma``) to integrate.
    tol: float, optional
        Integrator local relative error tolerance.
    initial: AtomicState, optional
        Warm-start state at t = 0.  Defaults to :func:`ground_state`.
    samples: int, optional
        Number of uniform intervals on the returned period.

    Returns
    -------
    Trajectory
        One settled period, or a single fixed point sample.
    """
    if settle_tol <= 0:
        raise ValueError(f"settle_tol must be > 0, got {settle_tol}")
    y = (initial or ground_state(params)).to_vector()

    def derivative_norm(t, y):
        return float(np.max(np.abs(rhs_vector(t, y, e_in, params))))

    if params.epsilon == 0:
        chunk = 2 * math.pi / params.gamma
        t = 0.0
        residual = derivative_norm(t, y)
        for _ in range(max_periods):
            if residual < settle_tol:
                return _fixed_point_trajectory(y, t, e_in, params)
            y = _propagate(y, e_in, params, t, t + chunk, tol)
            t += chunk
            residual = derivative_norm(t, y)
        if residual < settle_tol:
            return _fixed_point_trajectory(y, t, e_in, params)
        raise SettleError(residual, max_periods)

    period = params.period
    if max(derivative_norm(k * period / 4, y) for k in range(4)) < settle_tol:
        return _fixed_point_trajectory(y, 0.0, e_in, params)

    residual = math.inf
    for k in range(max_periods):
        y_next = _propagate(y, e_in, params, k * period, (k + 1) * period, tol)
        residual = float(np.max(np.abs(y_next - y)))
        y = y_next
        if residual < settle_tol:
            logger.debug(f"Settled after {k + 1} periods (residual {residual:.3e}).")
            break
    else:
        raise SettleError(residual, max_periods)

    t0 = (k + 1) * period
    return integrate(AtomicState.from_vector(y), e_in, params, t0 + period, tol=tol, t_start=t0, samples=samples)


def _project(values: np.ndarray, times: np.ndarray, omega: float, span: float) -> complex:
    """Trapezoidal projection of ``values`` onto ``exp(i omega t)``."""
    return complex(trapezoid(values * np.exp(-1j * omega * times), times) / span)


def extract_harmonics(
    trajectory: Trajectory, epsilon: float, n_max: int = 8, samples: int = 512
) -> HarmonicSolution:
    """
    Fourier coefficients of a trajectory spanning one drive period.

    Parameters
    ----------
    trajectory: Trajectory
        One period of a settled orbit (both end points included), or a one-sample fixed point.
    epsilon: float
        Drive frequency.  Harmonic ``n`` is projected onto ``exp(i n epsilon t)`` using absolute times.
    n_max: int, optional
        Highest harmonic index.
    samples: int, optional
        Number of intervals used when a non-uniform trajectory is resampled.

    Returns
    -------
    HarmonicSolution
        Harmonics of ``sm`` (``a``), ``s0`` (``b``) and of the total field (``modes``).
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    indices = range(-n_max, n_max + 1)

    if len(trajectory) == 1:
        a = {n: 0j for n in indices}
        b = {n: 0j for n in indices}
        modes = {n: 0j for n in indices}
        a[0] = complex(trajectory.sm[0])
        b[0] = complex(trajectory.s0[0])
        modes[0] = complex(trajectory.fields_total[0])
        return HarmonicSolution(n_max=n_max, a=a, b=b, modes=modes, e_in=trajectory.e_in)

    if epsilon == 0:
        raise HarmonicsError("Harmonics of a multi-sample trajectory need a non-zero epsilon.")
    period = 2 * math.pi / abs(epsilon)
    times = trajectory.times
    span = times[-1] - times[0]
    if abs(span - period) > 0.01 * period:
        raise HarmonicsError(f"Trajectory spans {span:.6g}, not one period ({period:.6g}).")

    s0, sm, fields_total = trajectory.s0, trajectory.sm, trajectory.fields_total
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-8, atol=0):
        grid = np.linspace(times[0], times[-1], max(samples, len(times) - 1) + 1)

        def resample(values):
            if np.iscomplexobj(values):
                return np.interp(grid, times, values.real) + 1j * np.interp(grid, times, values.imag)
            return np.interp(grid, times, values)

        s0, sm, fields_total = resample(s0), resample(sm), resample(fields_total)
        times = grid

    a = {n: _project(sm, times, n * epsilon, span) for n in indices}
    b = {n: _project(s0, times, n * epsilon, span) for n in indices}
    modes = {n: _project(fields_total, times, n * epsilon, span) for n in indices}
    return HarmonicSolution(n_max=n_max, a=a, b=b, modes=modes, e_in=trajectory.e_in)
