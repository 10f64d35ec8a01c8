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
import numpy as np
import pytest

from obsideband.bloch import extract_harmonics, ground_state, integrate, rhs_vector, settle
from obsideband.errors import ParamError, ShootingError
from obsideband.floquet import _input_sensitivity, branch_orbit, floquet_check, is_stable, monodromy, periodic_orbit
from obsideband.sideband import solve_triplet


def test_undriven(driven_params):
    """Test the undriven ground state is a stable orbit."""
    multipliers = floquet_check(solve_triplet(0, driven_params), driven_params)
    assert len(multipliers) == 3
    assert is_stable(multipliers)
    assert list(np.abs(multipliers)) == sorted(np.abs(multipliers), reverse=True)


@pytest.mark.parametrize(
    "branch, e0_values",
    [(0, np.linspace(0.02, 0.25, 10)), (1, np.linspace(1.2, 2.4, 10)), (2, np.linspace(6.0, 19.0, 10))],
)
def test_branch_stability(driven_params, driven_curve, branch, e0_values):
    """Test Floquet multipliers agree with the slope label at points along each branch."""
    segment = driven_curve.segments[branch]
    assert driven_curve.e0_abs[segment.start] <= e0_values[0]
    assert e0_values[-1] <= driven_curve.e0_abs[segment.stop]
    for e0 in e0_values:
        multipliers = floquet_check(solve_triplet(e0, driven_params), driven_params, tol=1e-9)
        assert is_stable(multipliers) == segment.stable, f"e0 = {e0}"


def test_branch_orbit(driven_params):
    """Test the branch orbit is periodic, has the requested central mode and is unstable between the folds."""
    triplet = solve_triplet(2.0, driven_params)
    state, e_in, matrix = branch_orbit(triplet.e0, driven_params, triplet.initial_state(), triplet.e_in)
    trajectory = integrate(state, e_in, driven_params, driven_params.period, samples=512)
    assert trajectory.final_state.s0 == pytest.approx(state.s0, abs=1e-7)
    assert trajectory.final_state.sm == pytest.approx(state.sm, abs=1e-7)
    harmonics = extract_harmonics(trajectory, driven_params.epsilon, n_max=1)
    assert harmonics.modes[0] == pytest.approx(2.0, abs=1e-6)
    assert not is_stable(np.linalg.eigvals(matrix))
    # the orbit stays close to the harmonic estimate it was seeded from
    assert abs(e_in - triplet.e_in) < 0.5 * abs(triplet.e0 - triplet.e_in)


def test_branch_orbit_errors(driven_params, resonant_params):
    """Test branch_orbit() error cases."""
    guess = ground_state(driven_params)
    with pytest.raises(ShootingError):
        branch_orbit(1.0, driven_params, guess, 1.0, max_iter=0)
    with pytest.raises(ParamError):
        branch_orbit(1.0, resonant_params, guess, 1.0)


def test_floquet_check_drift(driven_params):
    """Test floquet_check() rejects an orbit that moved away from the seed coherence."""
    with pytest.raises(ShootingError):
        floquet_check(solve_triplet(5.0, driven_params), driven_params, max_drift=0)


def test_input_sensitivity(driven_params):
    """Test the input field sensitivity against differences of the affine right-hand side."""
    y = np.array([0.05, 0.02, -0.6])
    sens = _input_sensitivity(y, driven_params)
    base = rhs_vector(0.3, y, 0j, driven_params)
    np.testing.assert_allclose(sens[:, 0], rhs_vector(0.3, y, 1.0, driven_params) - base, atol=1e-12)
    np.testing.assert_allclose(sens[:, 1], rhs_vector(0.3, y, 1j, driven_params) - base, atol=1e-12)


def test_periodic_orbit_matches_settled(driven_params):
    """Test the shooting orbit coincides with the orbit reached by forward integration."""
    triplet = solve_triplet(0.3, driven_params)
    state, matrix = periodic_orbit(triplet.e_in, driven_params, triplet.initial_state())
    settled = settle(triplet.e_in, driven_params, initial=triplet.initial_state()).states[0]
    assert state.s0 == pytest.approx(settled.s0, abs=1e-7)
    assert state.sm == pytest.approx(settled.sm, abs=1e-7)
    assert matrix.shape == (3, 3)


def test_monodromy_undriven(driven_params):
    """Test the undriven monodromy matrix leaves the ground state in place."""
    y0 = ground_state(driven_params).to_vector()
    y_end, matrix = monodromy(y0, 0j, driven_params)
    np.testing.assert_allclose(y_end, y0, atol=1e-12)
    assert np.max(np.abs(np.linalg.eigvals(matrix))) < 1


def test_resonant_rejected(resonant_params):
    """Test monodromy() rejects the resonant problem."""
    with pytest.raises(ParamError):
        monodromy(np.zeros(3), 1.0, resonant_params)


def test_shooting_error(driven_params):
    """Test periodic_orbit() raises ShootingError when out of iterations."""
    with pytest.raises(ShootingError):
        periodic_orbit(1.0, driven_params, ground_state(driven_params), max_iter=0)


@pytest.mark.parametrize(
    "multipliers, exp_stable", [([0.5, 0.1j, -0.2], True), ([1.0, 0.1, 0.1], False), ([-1.5, 0.2, 0.2], False)]
)
def test_is_stable(multipliers, exp_stable):
    """Test is_stable() against the unit circle."""
    assert is_stable(np.array(multipliers)) == exp_stable
