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
import dataclasses

import numpy as np
import pytest

from obsideband.enums import Direction, FoldKind, Mode, Spacing
from obsideband.errors import ParamError, SingularError
from obsideband.params import ModelParams
from obsideband.sweep import (
    Jump,
    ResponseCurve,
    Segment,
    classify_branches,
    e0_grid,
    hysteresis,
    locate_folds,
    replay_hysteresis,
    sweep,
    turning_points,
)


@pytest.mark.parametrize(
    "args, exp_grid",
    [
        ((0, 1, 5), [0, 0.25, 0.5, 0.75, 1]),
        ((0, 1, 5, "linear"), [0, 0.25, 0.5, 0.75, 1]),
        ((0.01, 100, 5, Spacing.log), [0.01, 0.1, 1, 10, 100]),
    ],
)
def test_e0_grid(args, exp_grid):
    """Test e0_grid() with linear and logarithmic spacing."""
    assert e0_grid(*args) == pytest.approx(exp_grid)


@pytest.mark.parametrize("args", [(1, 0, 5), (-1, 1, 5), (0, 1, 1), (0, 1, 5, Spacing.log), (0, 1, 5, "cubic")])
def test_e0_grid_error(args):
    """Test e0_grid() rejects invalid bounds, point counts and spacings."""
    with pytest.raises(ValueError):
        e0_grid(*args)


def test_sweep_invalid(driven_params):
    """Test sweep() rejects unsorted grids and the resonant problem."""
    with pytest.raises(ValueError):
        sweep([1.0, 0.5], driven_params)
    with pytest.raises(ValueError):
        sweep([], driven_params)
    with pytest.raises(ParamError):
        sweep([0.5, 1.0], driven_params.replace(epsilon=0))


def test_single_point(driven_params):
    """Test a single point sweep is one stable segment without turning points."""
    curve = classify_branches(sweep([0.0], driven_params))
    assert len(curve) == 1
    assert curve.e_in_abs[0] == 0
    assert curve.folds == ()
    assert len(curve.segments) == 1
    assert curve.stable == [True]


def test_curve_order(driven_params):
    """Test ResponseCurve requires strictly increasing central amplitudes."""
    curve = sweep([0.5, 1.0], driven_params)
    with pytest.raises(ValueError):
        ResponseCurve(params=driven_params, points=curve.points[::-1])


def test_monotone():
    """Test a sub-critical response has no turning points and one stable segment."""
    params = ModelParams(n_eff=5, epsilon=2)
    curve = classify_branches(sweep(e0_grid(0, 5, 50), params, num_threads=2))
    assert len(curve) == 50
    assert curve.gaps == ()
    assert curve.folds == ()
    assert len(curve.segments) == 1
    assert curve.segments[0].stable
    assert (curve.segments[0].start, curve.segments[0].stop) == (0, 49)
    assert np.all(curve.slope_signs[1:] > 0)
    for direction in Direction:
        assert hysteresis(curve, direction).jumps == ()


def test_sweep_depth(driven_params):
    """Test sweep() passes the continued fraction depth to every point."""
    curve = sweep(e0_grid(0.1, 1, 4), driven_params, depth=4)
    assert curve.depth == 4
    assert [p.depth for p in curve.points] == [4] * 4
    assert curve.solve(0.1).a0 == pytest.approx(curve.points[0].a0)


def test_turning_points(driven_curve):
    """Test the S-shaped response has an upper then a lower turning point."""
    upper, lower = driven_curve.folds
    assert upper.kind == FoldKind.upper
    assert lower.kind == FoldKind.lower
    assert 11 < upper.e_in_star < 13.5
    assert 6.5 < lower.e_in_star < 7.6
    assert upper.e0_star == pytest.approx(0.573, abs=0.05)
    assert lower.e0_star == pytest.approx(3.42, abs=0.1)
    assert upper.e0_star < lower.e0_star
    # refined turning points are extrema of the sampled response
    assert upper.e_in_star >= driven_curve.e_in_abs[driven_curve.e0_abs < 1].max() - 1e-12
    lo, hi = lower.index_interval
    assert hi == lo + 1
    assert driven_curve.e0_abs[lo] <= lower.e0_star <= driven_curve.e0_abs[hi]
    # both turning points are refined off the grid onto extrema of the continuous response
    for fold, sign in [(upper, 1), (lower, -1)]:
        assert np.min(np.abs(driven_curve.e0_abs - fold.e0_star)) > 1e-9
        for step in [-1e-3, 1e-3]:
            neighbour = abs(driven_curve.solve(fold.e0_star + step).e_in)
            assert sign * (fold.e_in_star - neighbour) >= 0


def _cubic(x: float, k: int = 0) -> float:
    """Cubic with a maximum of 2 at x = -1 and a minimum of -2 at x = 1."""
    return x**3 - 3 * x


def test_locate_folds():
    """Test locate_folds() refines both kinds of turning point between grid samples."""
    x = np.linspace(-2, 2.1, 40)
    folds = locate_folds(x, _cubic(x), _cubic)
    assert [f.kind for f in folds] == [FoldKind.upper, FoldKind.lower]
    upper, lower = folds
    assert upper.e0_star == pytest.approx(-1, rel=1e-6)
    assert upper.e_in_star == pytest.approx(2, rel=1e-10)
    assert lower.e0_star == pytest.approx(1, rel=1e-6)
    assert lower.e_in_star == pytest.approx(-2, rel=1e-10)
    for fold in folds:
        lo, hi = fold.index_interval
        assert x[lo] <= fold.e0_star <= x[hi]


def test_locate_folds_failure(caplog):
    """Test a failed refinement keeps the grid sample and logs a warning."""

    def singular(t: float, k: int) -> float:
        raise SingularError("test function")

    x = np.linspace(-2, 2.1, 40)
    folds = locate_folds(x, _cubic(x), singular)
    assert len(folds) == 2
    assert all(f.e0_star in x for f in folds)
    assert "Fold refinement" in caplog.text


@pytest.mark.parametrize("mode", [Mode.red, Mode.blue, "red"])
def test_mode_turning_points(driven_curve, mode):
    """Test every output mode switches at the same input fields as the central mode."""
    folds = turning_points(driven_curve, mode=mode)
    assert len(folds) == len(driven_curve.folds)
    for fold, central in zip(folds, driven_curve.folds):
        assert fold.mode == Mode(mode)
        assert fold.kind == central.kind
        assert fold.e_in_star == pytest.approx(central.e_in_star, rel=1e-8)


def test_segments(driven_curve):
    """Test the branches between turning points are stable, unstable and stable."""
    segments = driven_curve.segments
    assert [s.stable for s in segments] == [True, False, True]
    assert segments[0].start == 0
    assert segments[-1].stop == len(driven_curve) - 1
    for prev, segment in zip(segments[:-1], segments[1:]):
        assert segment.start == prev.stop + 1
    upper, lower = driven_curve.folds
    assert segments[0].e_in_range[1] == pytest.approx(upper.e_in_star)
    assert segments[1].e_in_range == pytest.approx((lower.e_in_star, upper.e_in_star))
    assert segments[2].covers(upper.e_in_star)
    assert not segments[0].covers(upper.e_in_star + 0.1)
    assert 0 in segments[0]
    assert len(driven_curve) - 1 not in segments[0]
    # slope label agreement away from the turning points
    signs = driven_curve.slope_signs
    for segment in segments:
        inner = signs[segment.start + 2 : segment.stop - 1]
        assert np.all(inner == (1 if segment.stable else -1))


def test_sidebands(driven_curve):
    """Test sidebands stay small and decrease on the upper branch far from the turning point."""
    central = driven_curve.mode_abs(Mode.central)
    for mode in [Mode.red, Mode.blue]:
        sideband = driven_curve.mode_abs(mode)
        assert sideband.max() < 0.2 * central.max()
        assert sideband.max() < 0.5
    blue = driven_curve.mode_abs(Mode.blue)
    far = driven_curve.e0_abs > 8
    assert np.all(np.diff(blue[far]) < 0)


def test_hysteresis_up(driven_curve):
    """Test the up-sweep jumps from the lower to the upper branch at the upper turning point."""
    report = hysteresis(driven_curve, Direction.up)
    assert report.direction == Direction.up
    assert len(report.jumps) == 1
    jump = report.jumps[0]
    assert jump.kind == FoldKind.upper
    assert (jump.from_segment, jump.to_segment) == (0, 2)
    assert jump.e_in == pytest.approx(driven_curve.folds[0].e_in_star)
    assert jump.before[0] == pytest.approx(0.573, abs=0.05)
    assert jump.after[0] == pytest.approx(11, abs=1)
    # the blue sideband collapses, the red one grows
    assert jump.before[2] == pytest.approx(0.203, rel=0.1)
    assert jump.after[2] < 0.1 * jump.before[2]
    assert jump.after[1] > jump.before[1]


def test_hysteresis_down(driven_curve):
    """Test the down-sweep jumps from the upper to the lower branch at the lower turning point."""
    report = hysteresis(driven_curve, "down")
    assert len(report.jumps) == 1
    jump = report.jumps[0]
    assert jump.kind == FoldKind.lower
    assert (jump.from_segment, jump.to_segment) == (2, 0)
    assert jump.before[0] == pytest.approx(3.42, abs=0.1)
    central_change, red_change, blue_change = jump.relative_change
    assert central_change == pytest.approx(-0.948, abs=0.02)
    # the red sideband drops further than the central mode, the blue one grows
    assert red_change == pytest.approx(-0.993, abs=0.01)
    assert red_change < central_change
    assert blue_change > 0


def test_down_jump_contrast(driven_curve):
    """Test sidebands that drop at a downward jump drop further than the central mode, and the others rise."""
    jumps = hysteresis(driven_curve, Direction.down).jumps
    assert jumps
    for jump in jumps:
        central_change, *sideband_changes = jump.relative_change
        assert central_change < 0
        dropping = [change for change in sideband_changes if change < 0]
        rising = [change for change in sideband_changes if change >= 0]
        assert dropping
        assert all(change < central_change for change in dropping)
        assert all(change > 0 for change in rising)
        # ℰ₋₁ is fed by the conjugate of the red coherence, and moves against the central mode
        assert sideband_changes[1] > 0
        assert jump.after[2] > jump.before[2]


def test_hysteresis_classifies(driven_params, driven_curve):
    """Test hysteresis() classifies an unclassified curve."""
    bare = dataclasses.replace(driven_curve, folds=(), segments=())
    report = hysteresis(bare, Direction.up)
    assert report.jumps[0].e_in == pytest.approx(driven_curve.folds[0].e_in_star)


def test_verify(driven_params):
    """Test Floquet multipliers confirm the slope labels."""
    curve = classify_branches(sweep(e0_grid(0, 12, 120), driven_params), verify=True, verify_points=1)
    assert [s.stable for s in curve.segments] == [True, False, True]
    assert all(s.verified for s in curve.segments)


def test_unverified(driven_curve):
    """Test segments are unverified by default."""
    assert all(s.verified is None for s in driven_curve.segments)
    assert Segment(start=0, stop=1, stable=True, e_in_range=(0, 1)).verified is None


def test_jump_relative_change():
    """Test Jump.relative_change() per mode."""
    jump = Jump(e_in=1.0, kind=FoldKind.upper, before=(1.0, 0.5, 0.0), after=(2.0, 0.25, 0.1))
    assert jump.relative_change == (1.0, -0.5, float("inf"))


def test_replay_hysteresis(driven_params):
    """Test the time-domain replay jumps once between the turning points of an up-sweep."""
    report = replay_hysteresis(driven_params, [18, 2, 6, 10, 14], Direction.up)
    assert len(report.jumps) == 1
    jump = report.jumps[0]
    assert jump.e_in == 14
    assert jump.kind == FoldKind.upper
    assert jump.before[0] < 1
    assert jump.after[0] > 10


def test_replay_resonant(resonant_params):
    """Test the replay rejects the resonant problem."""
    with pytest.raises(ParamError):
        replay_hysteresis(resonant_params, [1, 2], Direction.up)
