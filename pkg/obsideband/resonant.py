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
The resonant (``epsilon = 0``) problem: closed-form input-output relation, output branches and their linear stability.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from obsideband import bloch
from obsideband.bloch import AtomicState
from obsideband.errors import DegenerateError, ParamError, SingularError
from obsideband.params import ModelParams
from obsideband.sweep import TurningPoint, locate_folds
from obsideband.utils import hybrid_grid

logger = logging.getLogger(__name__)

_grid_points = 2000
_phase_samples = 256


@dataclass(frozen=True)
class ResonantPoint:
    """A stationary state of the resonant problem."""

    e_t: complex
    """ Total (output) field. """

    e_in: complex
    """ Input field. """

    s0_eq: float
    sm_eq: complex
    stable: bool
    eigen_real_parts: Tuple[float, float, float]
    """ Real parts of the Jacobian eigenvalues, in decreasing order. """


def _check_resonant(params: ModelParams):
    if params.epsilon != 0:
        raise ParamError("epsilon", f"the resonant relation needs epsilon = 0, got {params.epsilon!r}")


def fixed_point_state(e_t: complex, params: ModelParams) -> AtomicState:
    """
    Stationary Bloch variables at a given total field.

    With the total field held fixed the equations of motion are linear in ``(Re sm, Im sm, s0)``; this solves the
    resulting 3x3 real system.
    """
    _check_resonant(params)
    derived = params.derived
    drive = params.mu * complex(e_t)
    alpha = -1j * derived.omega_c
    beta = -derived.q
    kappa = 1j * drive.conjugate()
    gamma_c = params.gamma * derived.cosh2r
    # yapf: disable
    lhs = np.array([
        [(alpha + beta).real, (1j * (alpha - beta)).real, kappa.real],
        [(alpha + beta).imag, (1j * (alpha - beta)).imag, kappa.imag],
        [-4 * drive.imag, -4 * drive.real, -gamma_c],
    ])
    # yapf: enable
    try:
        u, v, s0 = np.linalg.solve(lhs, np.array([0.0, 0.0, params.gamma]))
    except np.linalg.LinAlgError as ex:
        raise DegenerateError(f"Singular fixed point system at e_t = {e_t}.") from ex
    return AtomicState(s0=float(s0), sm=complex(u, v))


def input_from_output(e_t, params: ModelParams):
    """
    Input field that produces a given stationary total field.

    Parameters
    ----------
    e_t: complex or numpy.ndarray
        Total (output) field(s).
    params: ModelParams
        Model parameters, with ``epsilon = 0``.

    Returns
    -------
    complex or numpy.ndarray
        Input field(s), with the shape of ``e_t``.
    """
    _check_resonant(params)
    derived = params.derived
    gamma_c = params.gamma * derived.cosh2r
    e_t_array = np.asarray(e_t, dtype=complex)
    drive = params.mu * e_t_array
    den = 2 * gamma_c * np.abs(drive) ** 2 + 4 * np.real(derived.q * drive**2) + gamma_c * derived.delta_omega_q
    if np.any(~np.isfinite(den)) or np.any(den <= 0):
        raise DegenerateError(f"Vanishing input-output denominator at e_t = {e_t}.")
    polarization = derived.omega_c * drive - 1j * np.conj(derived.q) * np.conj(drive)
    e_in = e_t_array + params.gamma * derived.lambda_c * polarization / (params.mu * den)
    return complex(e_in) if e_in.ndim == 0 else e_in


def _exact_cophase(params: ModelParams) -> bool:
    """Whether a real total field maps onto a real input field."""
    return params.delta == 0 and abs(math.sin(params.theta)) < 1e-12


def cophase_family(params: ModelParams, rho: float) -> List[complex]:
    """
    Total fields of modulus ``rho`` whose input field is real and positive.

    Parameters
    ----------
    params: ModelParams
        Model parameters, with ``epsilon = 0``.
    rho: float
        Modulus of the total field (>= 0).

    Returns
    -------
    list of complex
        Total fields, in order of increasing phase.
    """
    _check_resonant(params)
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    if rho == 0:
        return [0j]
    if _exact_cophase(params):
        return [complex(rho)]

    def im_part(phi: float) -> float:
        return input_from_output(rho * cmath.exp(1j * phi), params).imag

    phis = np.linspace(0, 2 * np.pi, _phase_samples + 1)
    values = input_from_output(rho * np.exp(1j * phis), params)
    family = []
    for k in range(_phase_samples):
        if values[k].imag == 0:
            phi = phis[k]
        elif values[k].imag * values[k + 1].imag < 0:
            phi = brentq(im_part, phis[k], phis[k + 1], xtol=1e-15, rtol=1e-13)
        else:
            continue
        e_t = rho * cmath.exp(1j * phi)
        if input_from_output(e_t, params).real > 0:
            family.append(e_t)
    return family


def _nearest(candidates: Sequence[complex], reference: Optional[complex]) -> Optional[complex]:
    """Candidate closest in phase to ``reference`` (the first candidate without one)."""
    if not candidates:
        return None
    if reference is None or reference == 0:
        return candidates[0]
    return min(candidates, key=lambda e_t: abs(cmath.phase(e_t / reference)))


def _cophase_input(rho: float, params: ModelParams, reference: Optional[complex] = None) -> Tuple[complex, complex]:
    """Co-phase total field nearest ``reference`` at modulus ``rho``, and its (real) input field."""
    e_t = _nearest(cophase_family(params, rho), reference)
    if e_t is None:
        raise DegenerateError(f"No co-phase total field of modulus {rho}.")
    return e_t, input_from_output(e_t, params)


def stability(point: ResonantPoint, params: ModelParams) -> Tuple[bool, Tuple[float, float, float]]:
    """
    Linear stability of a stationary state.

    Parameters
    ----------
    point: ResonantPoint
        Stationary state.
    params: ModelParams
        Model parameters, with ``epsilon = 0``.

    Returns
    -------
    tuple of (bool, tuple of float)
        Whether all Jacobian eigenvalues have negative real parts, and the real parts in decreasing order.
    """
    _check_resonant(params)
    return _stability(AtomicState(s0=point.s0_eq, sm=point.sm_eq), point.e_in, params)


def _stability(state: AtomicState, e_in: complex, params: ModelParams) -> Tuple[bool, Tuple[float, float, float]]:
    try:
        eigenvalues = np.linalg.eigvals(bloch.jacobian(0.0, state.to_vector(), e_in, params))
    except np.linalg.LinAlgError as ex:
        raise SingularError("Jacobian eigen-decomposition") from ex
    real_parts = tuple(float(x) for x in sorted(eigenvalues.real, reverse=True))
    return all(x < 0 for x in real_parts), real_parts


def resonant_point(e_t: complex, params: ModelParams, e_in: Optional[complex] = None) -> ResonantPoint:
    """Build a :class:`ResonantPoint`, with stability, from a stationary total field."""
    state = fixed_point_state(e_t, params)
    e_in = input_from_output(e_t, params) if e_in is None else complex(e_in)
    stable, real_parts = _stability(state, e_in, params)
    return ResonantPoint(
        e_t=complex(e_t), e_in=e_in, s0_eq=state.s0, sm_eq=state.sm, stable=stable, eigen_real_parts=real_parts
    )


def default_search_radius(params: ModelParams) -> float:
    """Total field modulus beyond which no fold is expected."""
    return params.gamma / params.mu * max(10.0, 2 * math.sqrt(params.n_eff))


def output_branches(e_in: complex, params: ModelParams, search_radius: Optional[float] = None) -> List[ResonantPoint]:
    """
    All stationary states driven by a given input field.

    A complex input ``|E| exp(i phi)`` is solved as the real input ``|E|`` at reference phase ``theta + 2 phi``, and the
    states are rotated back.

    Parameters
    ----------
    e_in: complex
        Input field.
    params: ModelParams
        Model parameters, with ``epsilon = 0``.
    search_radius: float, optional
        Largest total field modulus searched.  Defaults to :func:`default_search_radius`.

    Returns
    -------
    list of ResonantPoint
        Stationary states in order of increasing total field modulus.
    """
    _check_resonant(params)
    e_in = complex(e_in)
    if e_in == 0:
        return [resonant_point(0j, params, e_in=0j)]

    phi = cmath.phase(e_in)
    target = abs(e_in)
    real_params = params.replace(theta=params.theta + 2 * phi) if phi != 0 else params
    search_radius = search_radius or default_search_radius(params)
    rhos = hybrid_grid(search_radius, _grid_points)

    e_ts: List[complex] = []
    residuals = []
    reference = None
    for rho in rhos:
        e_t, e_in_rho = _cophase_input(rho, real_params, reference)
        reference = e_t
        e_ts.append(e_t)
        residuals.append(e_in_rho.real - target)

    roots = []
    for k in range(len(rhos) - 1):
        if residuals[k] == 0:
            roots.append(e_ts[k])
        elif residuals[k] * residuals[k + 1] < 0:
            ref = e_ts[k]
            rho = brentq(
                lambda x: _cophase_input(x, real_params, ref)[1].real - target,
                rhos[k],
                rhos[k + 1],
                xtol=1e-15,
                rtol=1e-12,
            )
            roots.append(_cophase_input(rho, real_params, ref)[0])
    if residuals[-1] == 0:
        roots.append(e_ts[-1])

    rotation = cmath.exp(1j * phi)
    points = []
    for e_t in roots:
        point = resonant_point(e_t, real_params, e_in=target)
        points.append(
            ResonantPoint(
                e_t=point.e_t * rotation,
                e_in=e_in,
                s0_eq=point.s0_eq,
                sm_eq=point.sm_eq / rotation,
                stable=point.stable,
                eigen_real_parts=point.eigen_real_parts,
            )
        )
    logger.debug(f"Found {len(points)} stationary states at e_in = {e_in}.")
    return points


def resonant_curve(params: ModelParams, rho_grid: Sequence[float]) -> List[ResonantPoint]:
    """
    Stationary states along the co-phase family (real, positive input) at the given total field moduli.

    Parameters
    ----------
    params: ModelParams
        Model parameters, with ``epsilon = 0``.
    rho_grid: sequence of float
        Strictly increasing, non-negative total field moduli.

    Returns
    -------
    list of ResonantPoint
        One point per grid value.
    """
    _check_resonant(params)
    rho_grid = np.asarray(rho_grid, dtype=float)
    if rho_grid.ndim != 1 or len(rho_grid) == 0 or np.any(rho_grid < 0) or np.any(np.diff(rho_grid) <= 0):
        raise ValueError("rho_grid must be a non-empty, strictly increasing, non-negative sequence.")
    points = []
    reference = None
    for rho in rho_grid:
        e_t, e_in = _cophase_input(float(rho), params, reference)
        reference = e_t
        points.append(resonant_point(e_t, params, e_in=e_in))
    return points


def resonant_folds(points: Sequence[ResonantPoint], params: ModelParams) -> List[TurningPoint]:
    """Turning points of ``|e_in|`` along a resonant curve, refined to ``1e-8`` relative."""
    _check_resonant(params)
    rhos = np.array([abs(p.e_t) for p in points])
    e_in_abs = np.array([abs(p.e_in) for p in points])

    def e_in_at(rho: float, k: int) -> float:
        return abs(_cophase_input(rho, params, points[k].e_t)[1])

    return locate_folds(rhos, e_in_abs, e_in_at)


def is_bistable(params: ModelParams, search_radius: Optional[float] = None, points: int = _grid_points) -> bool:
    """Whether ``|e_in|`` is non-monotone along the co-phase family."""
    _check_resonant(params)
    rhos = hybrid_grid(search_radius or default_search_radius(params), points)
    if _exact_cophase(params):
        return bool(np.any(np.diff(np.abs(input_from_output(rhos, params))) < 0))
    e_in_abs = []
    reference = None
    for rho in rhos:
        reference, e_in = _cophase_input(rho, params, reference)
        e_in_abs.append(abs(e_in))
    return bool(np.any(np.diff(e_in_abs) < 0))


def critical_n_eff(
    params: ModelParams, n_lo: float = 1e-3, n_hi: float = 1e4, rtol: float = 1e-4, search_radius: Optional[float] = None
) -> float:
    """
    Smallest effective atom number giving a bistable resonant response, found by bisection.

    Parameters
    ----------
    params: ModelParams
        Model parameters, with ``epsilon = 0``.  ``n_eff`` is ignored.
    n_lo, n_hi: float, optional
        Initial bracket.
    rtol: float, optional
        Relative bracket width at which bisection stops.
    search_radius: float, optional
        Search radius passed to :func:`is_bistable`.  Defaults to the radius at ``n_hi``.

    Returns
    -------
    float
        Critical ``n_eff``, or ``inf`` when the response is monotone at ``n_hi``.
    """
    _check_resonant(params)
    if not 0 < n_lo < n_hi:
        raise ValueError(f"Need 0 < n_lo < n_hi, got {n_lo}, {n_hi}")

    def bistable(n_eff: float) -> bool:
        trial = params.replace(n_eff=n_eff)
        return is_bistable(trial, search_radius=search_radius or default_search_radius(trial))

    if not bistable(n_hi):
        logger.warning(f"Resonant response is monotone up to n_eff = {n_hi}.")
        return math.inf
    if bistable(n_lo):
        return n_lo
    while n_hi - n_lo > rtol * n_hi:
        n_mid = math.sqrt(n_lo * n_hi) if n_hi / n_lo > 4 else 0.5 * (n_lo + n_hi)
        if bistable(n_mid):
            n_hi = n_mid
        else:
            n_lo = n_mid
    logger.debug(f"Critical n_eff bracket: [{n_lo:.6g}, {n_hi:.6g}]")
    return n_hi
