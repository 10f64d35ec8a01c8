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
Harmonic balance for the periodically driven (``epsilon != 0``) problem.

The coherence is expanded as ``sm(t) = sum_n a_n exp(i n epsilon t)``.  Linearizing the coefficient equations about
the unsaturated inversion gives a three-term recurrence ``B_n a_n + C_n a_{n+1} + D_n a_{n-1} = E_0 (n = 0) + H_1
(n = 1)``, closed here with truncated continued fractions to yield the central coherence ``a_0`` and the first
sideband coefficients ``a_1``, ``a_-1``.

Fields are parameterized by the central output amplitude ``e0``; the input field is an output of the solve.
"""

import cmath
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from obsideband.bloch import AtomicState
from obsideband.enums import Mode
from obsideband.errors import ParamError, SingularError
from obsideband.params import ModelParams

logger = logging.getLogger(__name__)

max_depth = 20
# relative change between successive depths at which the automatic depth stops
auto_depth_rtol = 1e-10


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Coefficients of the recurrence at index ``n`` for a given central amplitude."""

    n: int
    g_n: complex
    f_n: complex
    y_n: complex
    b_n: complex
    c_n: complex
    d_n: complex
    e_n: complex
    """ Driving coefficient (not an output mode amplitude). """
    h_n: complex


@dataclass(frozen=True)
class TripletSolution:
    """Central and first sideband solution at a given central output amplitude."""

    e0: complex
    """ Central output amplitude. """

    a0: complex
    a1: complex
    am1: complex
    x2: complex
    """ Truncated continued fraction ``a_2 / a_1``. """

    ym1: complex
    """ Truncated continued fraction ``a_-2 / a_-1``. """

    e_in: complex
    """ Input field, ``e0 - lambda_c * conj(a0) / mu``. """

    mode_p1: complex
    """ Red-shifted sideband amplitude, ``lambda_c * conj(am1) / mu``. """

    mode_m1: complex
    """ Blue-shifted sideband amplitude, ``lambda_c * conj(a1) / mu``. """

    b0: complex = 0j
    b1: complex = 0j
    bm1: complex = 0j
    depth: int = 2
    """ Continued fraction depth used. """

    epsilon: float = 0.0

    def mode(self, mode: Mode) -> complex:
        """Output amplitude of the given mode."""
        mode = Mode(mode)
        if mode == Mode.central:
            return self.e0
        return self.mode_p1 if mode == Mode.red else self.mode_m1

    @property
    def moduli(self) -> Tuple[float, float, float]:
        """``(|e0|, |mode_p1|, |mode_m1|)``."""
        return abs(self.e0), abs(self.mode_p1), abs(self.mode_m1)

    @property
    def sideband_ratio(self) -> float:
        """``max(|a1|, |am1|) / |a0|`` (0 when all three vanish)."""
        sidebands = max(abs(self.a1), abs(self.am1))
        if sidebands == 0:
            return 0.0
        return sidebands / abs(self.a0) if self.a0 != 0 else float("inf")

    def initial_state(self, t: float = 0.0) -> AtomicState:
        """Estimate of the orbit at time ``t`` from the retained harmonics."""
        phase = cmath.exp(1j * self.epsilon * t)
        sm = self.a0 + self.a1 * phase + self.am1 / phase
        s0 = self.b0 + self.b1 * phase + self.bm1 / phase
        return AtomicState(s0=s0.real, sm=sm)


def _check_periodic(params: ModelParams):
    if params.epsilon == 0:
        raise ParamError("epsilon", "the sideband solver needs epsilon != 0; use the resonant module for epsilon = 0")


def _divide(num: complex, den: complex, where: str, n: Optional[int] = None) -> complex:
    if den == 0:
        raise SingularError(where, n)
    value = num / den
    if not cmath.isfinite(value):
        raise SingularError(where, n)
    return value


def _y(n: int, params: ModelParams) -> complex:
    return complex(params.gamma * params.derived.cosh2r, n * params.epsilon)


def _g(n: int, field: complex, params: ModelParams) -> complex:
    derived = params.derived
    shift = params.gamma * derived.lambda_c.conjugate() / _y(0, params) if n != 0 else 0
    return 1j * (n * params.epsilon + derived.omega_c + shift) + 2 * abs(field) ** 2 / _y(n, params)


def _f(n: int, field: complex, params: ModelParams) -> complex:
    return -2 * field.conjugate() ** 2 / _y(n, params)


def coeffs(n: int, e0: complex, params: ModelParams) -> RecurrenceCoeffs:
    """
    Recurrence coefficients at index ``n``.

    Parameters
    ----------
    n: int
        Harmonic index.
    e0: complex
        Central output amplitude.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.

    Returns
    -------
    RecurrenceCoeffs
        The eight coefficients at ``n``.
    """
    _check_periodic(params)
    derived = params.derived
    q = derived.q
    cosh2r = derived.cosh2r
    # fields enter the recurrence as Rabi frequencies
    field = params.mu * complex(e0)

    g_n = _g(n, field, params)
    f_n = _f(n, field, params)
    g_mn_c = _g(-n, field, params).conjugate()
    g_1mn_c = _g(1 - n, field, params).conjugate()
    f_mn_c = _f(-n, field, params).conjugate()
    f_1mn_c = _f(1 - n, field, params).conjugate()

    f_over_g = _divide(f_n, g_mn_c, "recurrence coefficient", n)
    inv_g1 = _divide(1, g_1mn_c, "recurrence coefficient", n)

    return RecurrenceCoeffs(
        n=n,
        g_n=g_n,
        f_n=f_n,
        y_n=_y(n, params),
        b_n=g_n - f_over_g * f_mn_c - abs(q) ** 2 * inv_g1,
        c_n=-q.conjugate() * f_over_g,
        d_n=-q * f_1mn_c * inv_g1,
        e_n=-1j / cosh2r * (field * f_over_g + field.conjugate()),
        h_n=-1j * q * field * inv_g1 / cosh2r,
    )


def _check_depth(depth: int):
    if isinstance(depth, bool) or not isinstance(depth, int) or not 1 <= depth <= max_depth:
        raise ValueError(f"depth must be an integer in [1, {max_depth}], got {depth!r}")


def _x_fraction(e0: complex, params: ModelParams, depth: int, start_n: int) -> complex:
    x = 0j
    for n in range(start_n + depth, start_n - 1, -1):
        k = coeffs(n, e0, params)
        x = -_divide(k.d_n, k.b_n + k.c_n * x, "continued fraction x", n)
    return x


def _y_fraction(e0: complex, params: ModelParams, depth: int) -> complex:
    y = 0j
    for m in range(2 + depth, 1, -1):
        k = coeffs(-m, e0, params)
        y = -_divide(k.c_n, k.b_n + k.d_n * y, "continued fraction y", -m)
    return y


def _auto_depth(fraction: Callable[[int], complex]) -> Tuple[complex, int]:
    """Increase the depth from 2 until successive truncations agree to ``auto_depth_rtol``."""
    value = fraction(2)
    for depth in range(3, max_depth + 1):
        next_value = fraction(depth)
        if abs(next_value - value) <= auto_depth_rtol * abs(next_value):
            return next_value, depth
        value = next_value
    logger.debug(f"Continued fraction not converged at depth {max_depth}.")
    return value, max_depth


def continued_fraction_x(e0: complex, params: ModelParams, depth: Optional[int] = 2, start_n: int = 2) -> complex:
    """
    Descending continued fraction ``x_n = -D_n / (B_n + C_n x_{n+1})`` at ``n = start_n``.

    Levels ``start_n`` to ``start_n + depth`` are evaluated and the tail beyond them is set to zero.  ``depth=None``
    selects the depth automatically.
    """
    _check_periodic(params)
    if depth is None:
        return _auto_depth(lambda d: _x_fraction(e0, params, d, start_n))[0]
    _check_depth(depth)
    return _x_fraction(e0, params, depth, start_n)


def continued_fraction_y(e0: complex, params: ModelParams, depth: Optional[int] = 2) -> complex:
    """
    Ascending continued fraction ``y_-n = -C_-(n+1) / (B_-(n+1) + D_-(n+1) y_-(n+1))`` at ``n = 1``.

    Levels ``-2`` to ``-(2 + depth)`` are evaluated and the tail beyond them is set to zero.  ``depth=None`` selects
    the depth automatically.
    """
    _check_periodic(params)
    if depth is None:
        return _auto_depth(lambda d: _y_fraction(e0, params, d))[0]
    _check_depth(depth)
    return _y_fraction(e0, params, depth)


def solve_triplet(e0: complex, params: ModelParams, depth: Optional[int] = 2) -> TripletSolution:
    """
    Solve for the central and first sideband coherences at a given central output amplitude.

    Parameters
    ----------
    e0: complex
        Central output amplitude.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    depth: int, optional
        Continued fraction depth in [1, 20], or None to select it automatically.

    Returns
    -------
    TripletSolution
        Coherences, input field and output mode amplitudes.
    """
    _check_periodic(params)
    e0 = complex(e0)
    if depth is None:
        x2, depth_x = _auto_depth(lambda d: _x_fraction(e0, params, d, 2))
        ym1, depth_y = _auto_depth(lambda d: _y_fraction(e0, params, d))
        depth = max(depth_x, depth_y)
    else:
        _check_depth(depth)
        x2 = _x_fraction(e0, params, depth, 2)
        ym1 = _y_fraction(e0, params, depth)

    k0 = coeffs(0, e0, params)
    k1 = coeffs(1, e0, params)
    km1 = coeffs(-1, e0, params)

    den_p = k1.b_n + k1.c_n * x2
    den_m = km1.b_n + km1.d_n * ym1
    if den_p == 0 or den_m == 0:
        raise SingularError("triplet denominator")
    num = k0.e_n - k0.c_n * k1.h_n / den_p
    den = k0.b_n - k0.d_n * km1.c_n / den_m - k0.c_n * k1.d_n / den_p
    a0 = _divide(num, den, "triplet denominator")
    a1 = (k1.h_n - k1.d_n * a0) / den_p
    am1 = -km1.c_n * a0 / den_m

    # inversion harmonics from the linearized population equation
    field = params.mu * e0
    gamma = params.gamma
    b0 = (2j * (field * a0 - (field * a0).conjugate()) - gamma) / k0.y_n
    b1 = 2j * (field * a1 - field.conjugate() * am1.conjugate()) / k1.y_n
    bm1 = 2j * (field * am1 - field.conjugate() * a1.conjugate()) / km1.y_n

    lambda_c = params.derived.lambda_c
    mu = params.mu
    return TripletSolution(
        e0=e0,
        a0=a0,
        a1=a1,
        am1=am1,
        x2=x2,
        ym1=ym1,
        e_in=e0 - lambda_c * a0.conjugate() / mu,
        mode_p1=lambda_c * am1.conjugate() / mu,
        mode_m1=lambda_c * a1.conjugate() / mu,
        b0=b0,
        b1=b1,
        bm1=bm1,
        depth=depth,
        epsilon=params.epsilon,
    )
