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
Floquet stability of periodic orbits of the driven Bloch equations, via Newton shooting on the period map.

At an input field inside the bistable window several orbits coexist.  :func:`branch_orbit` removes the ambiguity by
solving for the orbit and the input field together, with the period mean of the total field held at the central
mode amplitude that labels the branch point.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from obsideband.bloch import AtomicState, jacobian, rhs_vector, solve_ode
from obsideband.errors import ParamError, ShootingError
from obsideband.params import ModelParams
from obsideband.sideband import TripletSolution

logger = logging.getLogger(__name__)


def _variational_rhs(t: float, z: np.ndarray, e_in: complex, params: ModelParams) -> np.ndarray:
    """State derivative augmented with the state transition matrix derivative."""
    y = z[:3]
    phi = z[3:].reshape(3, 3)
    dy = rhs_vector(t, y, e_in, params)
    dphi = jacobian(t, y, e_in, params) @ phi
    return np.concatenate([dy, dphi.ravel()])


def monodromy(
    y0: np.ndarray, e_in: complex, params: ModelParams, tol: float = 1e-10, t0: float = 0.0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Integrate the state and its variational equations over one drive period.

    Parameters
    ----------
    y0: numpy.ndarray
        State ``(Re sm, Im sm, s0)`` at ``t0``.
    e_in: complex
        Input field.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    tol: float, optional
        Integrator relative tolerance.
    t0: float, optional
        Start time.

    Returns
    -------
    tuple of numpy.ndarray
        State at ``t0 + T`` and the 3x3 monodromy matrix.
    """
    if params.epsilon == 0:
        raise ParamError("epsilon", "Floquet analysis needs epsilon != 0")
    z0 = np.concatenate([np.asarray(y0, dtype=float), np.eye(3).ravel()])
    sol = solve_ode(lambda t, z: _variational_rhs(t, z, e_in, params), (t0, t0 + params.period), z0, tol)
    z_end = sol.y[:, -1]
    return z_end[:3], z_end[3:].reshape(3, 3)


def periodic_orbit(
    e_in: complex,
    params: ModelParams,
    guess: AtomicState,
    tol: float = 1e-10,
    newton_tol: float = 1e-9,
    max_iter: int = 20,
) -> Tuple[AtomicState, np.ndarray]:
    """
    Find the periodic orbit through a fixed point of the period map with Newton iterations.

    Converges to unstable orbits as well as stable ones, given a close enough ``guess``.

    Parameters
    ----------
    e_in: complex
        Input field.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    guess: AtomicState
        Initial estimate of the orbit state at t = 0.
    tol: float, optional
        Integrator relative tolerance.
    newton_tol: float, optional
        Max norm of the period map residual at which iterations stop.
    max_iter: int, optional
        Maximum number of Newton iterations.

    Returns
    -------
    tuple of (AtomicState, numpy.ndarray)
        Orbit state at t = 0, and the monodromy matrix there.
    """
    y = guess.to_vector()
    residual = np.inf
    for iteration in range(max_iter):
        y_end, matrix = monodromy(y, e_in, params, tol=tol)
        r = y_end - y
        residual = float(np.max(np.abs(r)))
        logger.debug(f"Shooting iteration {iteration}: residual {residual:.3e}")
        if residual < newton_tol:
            return AtomicState.from_vector(y), matrix
        try:
            y = y + np.linalg.solve(matrix - np.eye(3), -r)
        except np.linalg.LinAlgError as ex:
            raise ShootingError(f"Singular shooting Jacobian at e_in = {e_in}.") from ex
    raise ShootingError(f"Shooting did not converge in {max_iter} iterations (residual {residual:.3e}).")


def _input_sensitivity(y: np.ndarray, params: ModelParams) -> np.ndarray:
    """Derivative of :func:`~obsideband.bloch.rhs_vector` with respect to ``(Re e_in, Im e_in)``."""
    drive = params.mu * y[2]
    return np.array([[0.0, drive], [drive, 0.0], [-4 * params.mu * y[1], -4 * params.mu * y[0]]])


def _pinned_rhs(t: float, z: np.ndarray, e_in: complex, params: ModelParams) -> np.ndarray:
    """
    Augmented system for shooting at a fixed central mode.

    ``z`` packs the state (3), the transition matrix (3x3), the input field sensitivities (3x2), and the running
    integrals of ``sm`` (2) and of the first two rows of both matrices (2x3, 2x2).
    """
    y = z[:3]
    phi = z[3:12].reshape(3, 3)
    sens = z[12:18].reshape(3, 2)
    jac = jacobian(t, y, e_in, params)
    return np.concatenate(
        [
            rhs_vector(t, y, e_in, params),
            (jac @ phi).ravel(),
            (jac @ sens + _input_sensitivity(y, params)).ravel(),
            y[:2],
            phi[:2].ravel(),
            sens[:2].ravel(),
        ]
    )


def branch_orbit(
    e0: complex,
    params: ModelParams,
    guess: AtomicState,
    e_in_guess: complex,
    tol: float = 1e-10,
    newton_tol: float = 1e-9,
    max_iter: int = 20,
) -> Tuple[AtomicState, complex, np.ndarray]:
    """
    Find the periodic orbit whose central output mode is ``e0``.

    Newton iterations solve for the orbit state at t = 0 and the input field together.  The unknowns are fixed by
    periodicity of the state and by the period mean of the total field, which must equal ``e0``.  Unlike
    :func:`periodic_orbit`, this cannot converge to a coexisting orbit on another branch.

    Parameters
    ----------
    e0: complex
        Central output mode amplitude of the orbit.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    guess: AtomicState
        Initial estimate of the orbit state at t = 0.
    e_in_guess: complex
        Initial estimate of the input field.
    tol: float, optional
        Integrator relative tolerance.
    newton_tol: float, optional
        Max norm of the residual at which iterations stop.
    max_iter: int, optional
        Maximum number of Newton iterations.

    Returns
    -------
    tuple of (AtomicState, complex, numpy.ndarray)
        Orbit state at t = 0, the input field driving it, and the monodromy matrix.
    """
    if params.epsilon == 0:
        raise ParamError("epsilon", "Floquet analysis needs epsilon != 0")
    period = params.period
    ell = params.derived.lambda_c / params.mu
    # derivative of the mean total field with respect to the integral of sm over a period
    mean_field = np.array([[ell.real, ell.imag], [ell.imag, -ell.real]]) / period
    target = np.array([complex(e0).real, complex(e0).imag])

    y = guess.to_vector()
    e = np.array([complex(e_in_guess).real, complex(e_in_guess).imag])
    residual = np.inf
    for iteration in range(max_iter):
        e_in = complex(e[0], e[1])
        z0 = np.concatenate([y, np.eye(3).ravel(), np.zeros(18)])
        sol = solve_ode(lambda t, z: _pinned_rhs(t, z, e_in, params), (0.0, period), z0, tol)
        z = sol.y[:, -1]
        matrix = z[3:12].reshape(3, 3)
        sens = z[12:18].reshape(3, 2)
        r = np.concatenate([z[:3] - y, e + mean_field @ z[18:20] - target])
        residual = float(np.max(np.abs(r)))
        logger.debug(f"Branch shooting iteration {iteration}: residual {residual:.3e}")
        if residual < newton_tol:
            return AtomicState.from_vector(y), e_in, matrix

        jac = np.block(
            [
                [matrix - np.eye(3), sens],
                [mean_field @ z[20:26].reshape(2, 3), np.eye(2) + mean_field @ z[26:30].reshape(2, 2)],
            ]
        )
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as ex:
            raise ShootingError(f"Singular shooting Jacobian at e0 = {e0}.") from ex
        y = y + step[:3]
        e = e + step[3:]
    raise ShootingError(f"Branch shooting did not converge in {max_iter} iterations (residual {residual:.3e}).")


def is_stable(multipliers: np.ndarray) -> bool:
    """Whether all Floquet multipliers lie inside the unit circle."""
    return bool(np.max(np.abs(multipliers)) < 1)


def floquet_check(
    point: TripletSolution,
    params: ModelParams,
    tol: float = 1e-10,
    guess: Optional[AtomicState] = None,
    max_drift: float = 0.5,
) -> np.ndarray:
    """
    Floquet multipliers of the periodic orbit on the branch point ``point``.

    The orbit is found with :func:`branch_orbit` at the central mode ``point.e0``, seeded from the harmonic estimate
    ``point.initial_state()`` and ``point.e_in``.

    Parameters
    ----------
    point: TripletSolution
        Harmonic balance solution.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    tol: float, optional
        Integrator relative tolerance.
    guess: AtomicState, optional
        Initial orbit estimate overriding ``point.initial_state()``.
    max_drift: float, optional
        Largest relative change of the central coherence ``a0`` between the seed and the converged orbit.  Beyond it
        the orbit is rejected with :class:`~obsideband.errors.ShootingError`.

    Returns
    -------
    numpy.ndarray
        The three multipliers, in order of decreasing modulus.
    """
    _, e_in, matrix = branch_orbit(point.e0, params, guess or point.initial_state(), point.e_in, tol=tol)
    # lambda * conj(a0) / mu = e0 - e_in, for the seed and the orbit alike
    seed = point.e0 - point.e_in
    if seed != 0:
        drift = abs(e_in - point.e_in) / abs(seed)
        if drift > max_drift:
            raise ShootingError(
                f"Orbit at e0 = {abs(point.e0):.6g} converged {drift:.3g} (relative) away from the seed coherence."
            )
    multipliers = np.linalg.eigvals(matrix)
    return multipliers[np.argsort(-np.abs(multipliers))]
