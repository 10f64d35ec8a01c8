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
import cmath
import math

import numpy as np
import pytest

from obsideband.bloch import (
    AtomicState,
    Trajectory,
    extract_harmonics,
    ground_state,
    integrate,
    jacobian,
    rhs,
    rhs_vector,
    settle,
    total_field,
)
from obsideband.errors import HarmonicsError, SettleError
from obsideband.params import ModelParams


@pytest.fixture
def detuned_params() -> ModelParams:
    return ModelParams(n_eff=10, r=0.4, theta=0.9, delta=0.3, epsilon=2.0, mu=1.5)


def _reference_rhs(t, s0, sm, e_in, params):
    """Bloch equations written out independently of the module."""
    gamma, c = params.gamma, math.cosh(2 * params.r)
    omega = params.delta - 0.5j * gamma * c
    q = 0.5 * gamma * math.sinh(2 * params.r) * cmath.exp(1j * params.theta)
    lam = 0.5j * gamma * params.n_eff
    drive = params.mu * e_in + lam * sm.conjugate()
    z = drive * sm
    ds0 = (2j * (z - z.conjugate())).real - gamma * (c * s0 + 1)
    dsm = -1j * omega * sm + 1j * drive.conjugate() * s0 - q * cmath.exp(1j * params.epsilon * t) * sm.conjugate()
    return ds0, dsm


@pytest.mark.parametrize("r, theta", [(0.0, 0.0), (0.5, math.pi), (1.2, 0.3)])
def test_ground_state_is_stationary(r, theta):
    """Test the undriven ground state is a fixed point of rhs()."""
    params = ModelParams(n_eff=101, r=r, theta=theta, epsilon=2)
    state = ground_state(params)
    assert state.s0 == pytest.approx(-1 / math.cosh(2 * r))
    assert state.sm == 0
    for t in [0.0, 0.3, 1.7]:
        deriv = rhs(t, state, 0j, params)
        assert abs(deriv.s0) < 1e-15
        assert abs(deriv.sm) < 1e-15


def test_rhs_reference(detuned_params):
    """Test rhs() against an independently written form of the equations."""
    rng = np.random.default_rng(1)
    for _ in range(20):
        s0 = rng.uniform(-1, 1)
        sm = complex(*rng.uniform(-0.5, 0.5, 2))
        e_in = complex(*rng.uniform(-3, 3, 2))
        t = rng.uniform(0, 10)
        deriv = rhs(t, AtomicState(s0=s0, sm=sm), e_in, detuned_params)
        ref_s0, ref_sm = _reference_rhs(t, s0, sm, e_in, detuned_params)
        assert deriv.s0 == pytest.approx(ref_s0, rel=1e-12, abs=1e-12)
        assert deriv.sm == pytest.approx(ref_sm, rel=1e-12, abs=1e-12)


def test_rhs_value(driven_params):
    """Test rhs() at a hand-evaluated state with the polarization feedback."""
    deriv = rhs(0.0, AtomicState(s0=-0.6, sm=0.05 + 0.02j), 0.3, driven_params)
    assert deriv.s0 == pytest.approx(-0.68395161912, rel=1e-9)
    assert deriv.sm == pytest.approx(-1.52419698603 - 0.81318281829j, rel=1e-9)


def test_jacobian_finite_difference(detuned_params):
    """Test jacobian() against central finite differences of rhs_vector()."""
    rng = np.random.default_rng(2)
    step = 1e-6
    for _ in range(10):
        y = np.array([*rng.uniform(-0.4, 0.4, 2), rng.uniform(-1, 1)])
        e_in = complex(*rng.uniform(-3, 3, 2))
        t = rng.uniform(0, 5)
        jac = jacobian(t, y, e_in, detuned_params)
        fd = np.empty((3, 3))
        for j in range(3):
            dy = np.zeros(3)
            dy[j] = step
            fd[:, j] = (rhs_vector(t, y + dy, e_in, detuned_params) - rhs_vector(t, y - dy, e_in, detuned_params)) / (
                2 * step
            )
        np.testing.assert_allclose(jac, fd, rtol=1e-6, atol=1e-6)


def test_total_field():
    """Test total_field() includes the polarization feedback, for scalars and arrays."""
    params = ModelParams(n_eff=4, mu=2)
    assert total_field(0.1 + 0.2j, 1.0, params) == pytest.approx(1.0 + 2j * (0.1 - 0.2j) / 2)
    values = total_field(np.array([0j, 0.1j]), 1.0, params)
    assert values.shape == (2,)
    assert values[0] == 1.0


def test_integrate_undriven_ground_state():
    """Test integrating from the ground state with no input stays there."""
    params = ModelParams(n_eff=101, r=0.5, theta=math.pi, epsilon=2)
    traj = integrate(ground_state(params), 0j, params, t_end=10)
    np.testing.assert_allclose(traj.s0, -1 / math.cosh(1.0), atol=1e-12)
    np.testing.assert_allclose(np.abs(traj.sm), 0, atol=1e-12)


def test_integrate_decay():
    """Test the inversion relaxes to -1/cosh(2r) from the excited state."""
    params = ModelParams(n_eff=1, r=0.5)
    traj = integrate(AtomicState(s0=1.0), 0j, params, t_end=40)
    assert traj.final_state.s0 == pytest.approx(-0.648054, abs=1e-6)


@pytest.mark.parametrize(
    "epsilon, t_end, samples, exp_len",
    [(2.0, math.pi, None, 65), (2.0, 2 * math.pi, None, 129), (0.0, 5.0, None, 257), (2.0, 1.0, 10, 11)],
)
def test_integrate_samples(epsilon, t_end, samples, exp_len):
    """Test integrate() output sampling, including both end points."""
    params = ModelParams(n_eff=5, epsilon=epsilon)
    traj = integrate(ground_state(params), 0.5, params, t_end=t_end, samples=samples)
    assert len(traj) == exp_len
    assert traj.times[0] == 0
    assert traj.times[-1] == pytest.approx(t_end)


@pytest.mark.parametrize("kwargs", [dict(t_end=1.0, tol=0), dict(t_end=0.0), dict(t_end=1.0, t_start=2.0)])
def test_integrate_invalid(kwargs):
    """Test integrate() rejects a non-positive tolerance or an empty time span."""
    params = ModelParams(n_eff=5)
    with pytest.raises(ValueError):
        integrate(ground_state(params), 0.5, params, **kwargs)


@pytest.mark.parametrize("params_name, seed", [("driven_params", 3), ("detuned_params", 5)])
def test_bloch_ball(request, params_name, seed):
    """Test trajectories starting inside the Bloch ball stay inside it."""
    params = request.getfixturevalue(params_name)
    rng = np.random.default_rng(seed)
    for _ in range(100):
        direction = rng.normal(size=3)
        norm = rng.uniform(0, 0.9)
        direction *= norm / np.linalg.norm(direction)
        # s0**2 + 4|sm|**2 = norm**2
        initial = AtomicState(s0=direction[2], sm=complex(direction[0], direction[1]) / 2)
        assert initial.bloch_norm == pytest.approx(norm**2)
        traj = integrate(initial, complex(*rng.uniform(-3, 3, 2)), params, t_end=2)
        assert np.all(traj.bloch_norm <= 1 + 1e-9)


def test_settle_no_input(detuned_params):
    """Test settle() returns the ground state as a single sample when there is no input."""
    traj = settle(0j, detuned_params)
    assert len(traj) == 1
    assert traj.final_state.s0 == pytest.approx(ground_state(detuned_params).s0)


def test_settle_period():
    """Test settle() returns exactly one drive period."""
    params = ModelParams(n_eff=10, r=0.3, theta=1.0, epsilon=2.0)
    traj = settle(1.5, params, samples=256)
    assert len(traj) == 257
    assert traj.times[-1] - traj.times[0] == pytest.approx(params.period)
    # periodic orbit
    assert traj.s0[-1] == pytest.approx(traj.s0[0], abs=1e-7)
    assert traj.sm[-1] == pytest.approx(traj.sm[0], abs=1e-7)


def test_settle_without_squeezing_has_no_sidebands():
    """Test an unsqueezed reservoir settles to a constant orbit with no sideband harmonics."""
    params = ModelParams(n_eff=10, epsilon=2.0)
    harmonics = extract_harmonics(settle(2.0, params), params.epsilon, n_max=3)
    assert abs(harmonics.a[0]) > 1e-3
    for n in [-3, -2, -1, 1, 2, 3]:
        assert abs(harmonics.a[n]) < 1e-7
        assert abs(harmonics.b[n]) < 1e-7


def test_settle_resonant():
    """Test settle() on the resonant problem returns a fixed point."""
    params = ModelParams(n_eff=10)
    traj = settle(2.0, params)
    assert len(traj) == 1
    deriv = rhs(0.0, traj.final_state, 2.0, params)
    assert max(abs(deriv.s0), abs(deriv.sm)) < 1e-9


def test_settle_error():
    """Test settle() raises SettleError when max_periods is exhausted."""
    params = ModelParams(n_eff=10, r=0.3, epsilon=2.0)
    with pytest.raises(SettleError) as ex:
        settle(1.0, params, max_periods=1)
    assert ex.value.periods == 1
    assert ex.value.residual > 1e-9


def test_harmonics_synthetic():
    """Test extract_harmonics() on a synthetic single-harmonic orbit."""
    epsilon = 2.0
    times = np.linspace(0, math.pi, 257)
    sm = 0.3 + 0.1 * np.exp(1j * epsilon * times)
    s0 = -0.5 + 0.2 * np.cos(epsilon * times)
    traj = Trajectory(times=times, s0=s0, sm=sm, fields_total=np.ones_like(sm), e_in=1.0)
    harmonics = extract_harmonics(traj, epsilon, n_max=2)
    assert harmonics.a[0] == pytest.approx(0.3, abs=1e-12)
    assert harmonics.a[1] == pytest.approx(0.1, abs=1e-12)
    assert abs(harmonics.a[-1]) < 1e-12
    assert harmonics.b[1] == pytest.approx(0.1, abs=1e-12)
    # real signal
    assert harmonics.b[-1] == pytest.approx(harmonics.b[1].conjugate(), abs=1e-12)
    assert harmonics.modes[0] == pytest.approx(1.0)
    assert harmonics.e_in == 1.0


def test_harmonics_non_uniform():
    """Test extract_harmonics() resamples a non-uniform time grid."""
    epsilon = 2.0
    times = np.sort(np.concatenate([[0.0, math.pi], np.random.default_rng(4).uniform(0, math.pi, 2000)]))
    sm = np.exp(1j * epsilon * times)
    traj = Trajectory(times=times, s0=np.zeros_like(times), sm=sm, fields_total=sm, e_in=0)
    harmonics = extract_harmonics(traj, epsilon, n_max=1, samples=4096)
    assert harmonics.a[1] == pytest.approx(1.0, abs=1e-3)


def test_harmonics_fixed_point():
    """Test extract_harmonics() treats a single sample as a constant orbit."""
    traj = Trajectory(times=[0.0], s0=[-0.5], sm=[0.1j], fields_total=[2.0], e_in=2.0)
    harmonics = extract_harmonics(traj, 0.0, n_max=2)
    assert harmonics.a == {-2: 0, -1: 0, 0: 0.1j, 1: 0, 2: 0}
    assert harmonics.b[0] == -0.5
    assert harmonics.modes[0] == 2.0


def test_harmonics_errors():
    """Test extract_harmonics() rejects trajectories not spanning one period."""
    times = np.linspace(0, 1.0, 11)
    traj = Trajectory(times=times, s0=np.zeros(11), sm=np.zeros(11), fields_total=np.zeros(11), e_in=0)
    with pytest.raises(HarmonicsError):
        extract_harmonics(traj, 2.0)
    with pytest.raises(HarmonicsError):
        extract_harmonics(traj, 0.0)
    with pytest.raises(ValueError):
        extract_harmonics(traj, 2 * math.pi, n_max=0)


@pytest.mark.parametrize(
    "times, s0", [([], []), ([0.0, 1.0], [0.0]), ([1.0, 0.0], [0.0, 0.0]), ([0.0, 0.0], [0.0, 0.0])]
)
def test_trajectory_invalid(times, s0):
    """Test Trajectory validates its arrays."""
    with pytest.raises(ValueError):
        Trajectory(times=times, s0=s0, sm=np.zeros(len(s0)), fields_total=np.zeros(len(s0)), e_in=0)


def test_state_vector():
    """Test AtomicState vector conversion."""
    state = AtomicState(s0=-0.2, sm=0.1 - 0.3j)
    assert AtomicState.from_vector(state.to_vector()) == state
    np.testing.assert_array_equal(state.to_vector(), [0.1, -0.3, -0.2])
