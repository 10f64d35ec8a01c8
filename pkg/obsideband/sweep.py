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
"""Response curves over a grid of central amplitudes: turning points, branch stability and hysteresis."""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from tqdm.auto import tqdm

from obsideband.bloch import extract_harmonics, settle
from obsideband.enums import Direction, FoldKind, Mode, Spacing
from obsideband.errors import IntegrationError, ParamError, ShootingError, SingularError, SweepQualityError
from obsideband.floquet import floquet_check, is_stable
from obsideband.params import ModelParams
from obsideband.sideband import TripletSolution, solve_triplet

logger = logging.getLogger(__name__)

# maximum fraction of singular grid points in a sweep
max_gap_fraction = 0.1
# number of gap bisections tried before a point is recorded as a gap
bridge_tries = 8

Moduli = Tuple[float, float, float]


@dataclass(frozen=True)
class TurningPoint:
    """A fold of the input field modulus along a response curve."""

    e_in_star: float
    """ Input field modulus at the fold. """

    e0_star: float
    """ Curve parameter (central or total field modulus) at the fold. """

    index_interval: Tuple[int, int]
    """ Adjacent grid indices bracketing the fold. """

    kind: FoldKind
    mode: Mode = Mode.central


@dataclass(frozen=True)
class Segment:
    """Points of a response curve between consecutive turning points."""

    start: int
    stop: int
    """ Index of the last point (inclusive). """

    stable: bool
    e_in_range: Tuple[float, float]
    """ Range of the input field modulus, including the bounding folds. """

    verified: Optional[bool] = None
    """ Whether Floquet multipliers agreed with ``stable`` at the checked points (None when unchecked). """

    def __contains__(self, index: int) -> bool:
        return self.start <= index <= self.stop

    def covers(self, e_in: float) -> bool:
        """Whether ``e_in`` lies in :attr:`e_in_range`."""
        return self.e_in_range[0] <= e_in <= self.e_in_range[1]


@dataclass(frozen=True, eq=False)
class ResponseCurve:
    """Triplet solutions ordered by central amplitude modulus, with optional turning points and branch labels."""

    params: ModelParams
    points: Tuple[TripletSolution, ...]
    depth: Optional[int] = 2
    gaps: Tuple[float, ...] = ()
    """ Central amplitudes skipped as singular. """

    folds: Tuple[TurningPoint, ...] = ()
    segments: Tuple[Segment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if np.any(np.diff(self.e0_abs) <= 0):
            raise ValueError("Response curve points must have strictly increasing |e0|.")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def e0_abs(self) -> np.ndarray:
        return np.array([abs(p.e0) for p in self.points])

    @property
    def e_in_abs(self) -> np.ndarray:
        return np.array([abs(p.e_in) for p in self.points])

    def mode_abs(self, mode: Mode) -> np.ndarray:
        """Modulus of the given output mode at each point."""
        return np.array([abs(p.mode(mode)) for p in self.points])

    @property
    def slope_signs(self) -> np.ndarray:
        """Sign of ``d|e_in| / d|e0|`` from centred differences."""
        if len(self.points) < 2:
            return np.zeros(len(self.points))
        return np.sign(np.gradient(self.e_in_abs, self.e0_abs))

    @property
    def stable(self) -> List[Optional[bool]]:
        """Stability label of each point (None for an unclassified curve)."""
        labels: List[Optional[bool]] = [None] * len(self.points)
        for segment in self.segments:
            for index in range(segment.start, segment.stop + 1):
                labels[index] = segment.stable
        return labels

    def solve(self, e0: complex) -> TripletSolution:
        """Triplet solution at ``e0`` with the curve's parameters and depth."""
        return solve_triplet(e0, self.params, depth=self.depth)


@dataclass(frozen=True)
class Jump:
    """A switch between stable branches."""

    e_in: float
    kind: FoldKind
    before: Moduli
    """ ``(|e0|, |mode_p1|, |mode_m1|)`` before the jump. """

    after: Moduli
    from_segment: Optional[int] = None
    to_segment: Optional[int] = None

    @property
    def relative_change(self) -> Moduli:
        """``(after - before) / before`` per mode."""
        return tuple((a - b) / b if b != 0 else float("inf") for a, b in zip(self.after, self.before))


@dataclass(frozen=True)
class HysteresisReport:
    """Jumps met when sweeping the input field in one direction."""

    direction: Direction
    jumps: Tuple[Jump, ...] = ()


def e0_grid(e0_min: float, e0_max: float, points: int, spacing: Spacing = Spacing.linear) -> np.ndarray:
    """
    Grid of central amplitude moduli.

    Parameters
    ----------
    e0_min, e0_max: float
        Grid end points, ``0 <= e0_min < e0_max``.
    points: int
        Number of points (>= 2).
    spacing: Spacing, optional
        Linear or logarithmic spacing.  Logarithmic spacing needs ``e0_min > 0``.

    Returns
    -------
    numpy.ndarray
        Strictly increasing grid.
    """
    spacing = Spacing(spacing)
    if not 0 <= e0_min < e0_max:
        raise ValueError(f"Need 0 <= e0_min < e0_max, got {e0_min}, {e0_max}")
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    if spacing == Spacing.log:
        if e0_min <= 0:
            raise ValueError("Logarithmic spacing needs e0_min > 0.")
        return np.geomspace(e0_min, e0_max, points)
    return np.linspace(e0_min, e0_max, points)


def _bridge(k: int, grid: np.ndarray, params: ModelParams, depth: Optional[int]) -> Optional[TripletSolution]:
    """Look for a regular point between grid point ``k`` and its neighbour."""
    if len(grid) < 2:
        return None
    neighbour = grid[k + 1] if k + 1 < len(grid) else grid[k - 1]
    for j in range(1, bridge_tries + 1):
        e0 = grid[k] + (neighbour - grid[k]) * 2.0**-j
        try:
            solution = solve_triplet(e0, params, depth=depth)
        except SingularError:
            continue
        logger.debug(f"Bridged singular point e0 = {grid[k]:.6g} with e0 = {e0:.6g}.")
        return solution
    return None


def sweep(
    e0_grid: Sequence[float], params: ModelParams, depth: Optional[int] = 2, num_threads: Optional[int] = None
) -> ResponseCurve:
    """
    Solve the triplet at every point of a central amplitude grid.

    Singular points are replaced by a nearby regular point where one exists, and otherwise recorded as gaps.

    Parameters
    ----------
    e0_grid: sequence of float
        Strictly increasing, non-negative central amplitudes.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    depth: int, optional
        Continued fraction depth (None selects it automatically).
    num_threads: int, optional
        Number of worker threads.  Defaults to the ``ThreadPoolExecutor`` default.

    Returns
    -------
    ResponseCurve
        Unclassified response curve.
    """
    if params.epsilon == 0:
        raise ParamError("epsilon", "the sideband sweep needs epsilon != 0")
    grid = np.asarray(e0_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(grid < 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("e0_grid must be a non-empty, strictly increasing, non-negative sequence.")

    def solve(e0: float) -> Optional[TripletSolution]:
        try:
            return solve_triplet(e0, params, depth=depth)
        except SingularError:
            return None

    with ThreadPoolExecutor(max_workers=num_threads) as executor:
        results = list(executor.map(solve, grid))

    points = []
    gaps = []
    for k, solution in enumerate(results):
        if solution is None:
            solution = _bridge(k, grid, params, depth)
        if solution is None:
            logger.warning(f"Singular point at e0 = {grid[k]:.6g} left as a gap.")
            gaps.append(float(grid[k]))
        else:
            points.append(solution)

    if len(gaps) > max_gap_fraction * len(grid):
        raise SweepQualityError(f"{len(gaps)} of {len(grid)} sweep points are singular.")
    return ResponseCurve(params=params, points=tuple(points), depth=depth, gaps=tuple(gaps))


def locate_folds(
    x: Sequence[float],
    values: Sequence[float],
    func: Callable[[float, int], float],
    mode: Mode = Mode.central,
    tol: float = 1e-8,
) -> List[TurningPoint]:
    """
    Turning points of ``values`` over ``x``, refined by golden-section search.

    Parameters
    ----------
    x: sequence of float
        Strictly increasing curve parameter.
    values: sequence of float
        Input field modulus at each ``x``.
    func: callable
        ``func(x, k)`` evaluates the input field modulus at ``x`` near grid index ``k``.
    mode: Mode, optional
        Mode label for the returned turning points.
    tol: float, optional
        Relative tolerance of the golden-section search.

    Returns
    -------
    list of TurningPoint
        Turning points in order of increasing ``x``.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(x) < 3:
        return []
    signs = np.sign(np.diff(values) / np.diff(x))

    folds = []
    prev = None
    for k, sign in enumerate(signs):
        if sign == 0:
            continue
        if prev is not None and signs[prev] != sign:
            upper = signs[prev] > 0
            window = values[prev + 1 : k + 1]
            j = prev + 1 + int(np.argmax(window) if upper else np.argmin(window))
            orientation = -1.0 if upper else 1.0
            x_star, e_in_star = x[j], values[j]
            try:
                res = minimize_scalar(
                    lambda t: orientation * func(t, j), bracket=(x[j - 1], x[j], x[j + 1]), method="golden", tol=tol
                )
                if res.fun <= orientation * e_in_star:
                    x_star, e_in_star = float(res.x), float(orientation * res.fun)
                else:
                    logger.warning(f"Fold refinement near x = {x[j]:.6g} did not improve on the grid point.")
            except (ValueError, SingularError) as ex:
                logger.warning(f"Fold refinement near x = {x[j]:.6g} failed, keeping the grid point: {ex}")
            interval = (j - 1, j) if x_star <= x[j] else (j, j + 1)
            kind = FoldKind.upper if upper else FoldKind.lower
            folds.append(
                TurningPoint(e_in_star=e_in_star, e0_star=float(x_star), index_interval=interval, kind=kind, mode=mode)
            )
        prev = k
    return folds


def turning_points(curve: ResponseCurve, mode: Mode = Mode.central) -> List[TurningPoint]:
    """
    Turning points of ``|e_in|`` along a response curve.

    All modes share the curve parameter ``e0``, so ``mode`` only labels the result.

    Parameters
    ----------
    curve: ResponseCurve
        Response curve.
    mode: Mode, optional
        Output mode the turning points are reported for.

    Returns
    -------
    list of TurningPoint
        Turning points refined to ``1e-8`` relative, in order of increasing ``|e0|``.
    """
    mode = Mode(mode)
    # all points share the phase of the grid
    phase = curve.points[0].e0 / abs(curve.points[0].e0) if len(curve) and curve.points[0].e0 != 0 else 1

    def e_in_at(e0_abs: float, k: int) -> float:
        return abs(curve.solve(e0_abs * phase).e_in)

    return locate_folds(curve.e0_abs, curve.e_in_abs, e_in_at, mode=mode)


def _segments(curve: ResponseCurve, folds: Sequence[TurningPoint]) -> List[Segment]:
    e_in_abs = curve.e_in_abs
    bounds = [0] + [f.index_interval[1] for f in folds] + [len(curve)]
    segments = []
    for k in range(len(bounds) - 1):
        start, stop = bounds[k], bounds[k + 1] - 1
        if k == 0:
            stable = not folds or folds[0].kind == FoldKind.upper
        else:
            stable = folds[k - 1].kind == FoldKind.lower
        ends = list(e_in_abs[start : stop + 1])
        if k > 0:
            ends.append(folds[k - 1].e_in_star)
        if k < len(folds):
            ends.append(folds[k].e_in_star)
        if start > stop:
            logger.warning(f"Empty branch segment between turning points {k - 1} and {k}.")
        segments.append(Segment(start=start, stop=stop, stable=stable, e_in_range=(min(ends), max(ends))))
    return segments


def classify_branches(
    curve: ResponseCurve, verify: bool = False, verify_points: int = 3, tol: float = 1e-10
) -> ResponseCurve:
    """
    Split a response curve at its turning points and label each segment stable or unstable.

    Segments where ``|e_in|`` increases with ``|e0|`` are stable, the others unstable.

    Parameters
    ----------
    curve: ResponseCurve
        Response curve.
    verify: bool, optional
        Compare the labels with Floquet multipliers at interior points of each segment.
    verify_points: int, optional
        Number of interior points checked per segment.
    tol: float, optional
        Integrator tolerance for the Floquet check.

    Returns
    -------
    ResponseCurve
        Copy of ``curve`` with :attr:`~ResponseCurve.folds` and :attr:`~ResponseCurve.segments` filled.
    """
    folds = turning_points(curve) if len(curve) >= 3 else []
    segments = _segments(curve, folds) if len(curve) else []

    if verify:
        checked = []
        for index, segment in enumerate(segments):
            if segment.stop - segment.start < 2:
                checked.append(segment)
                continue
            sample = np.unique(np.linspace(segment.start, segment.stop, verify_points + 2).round().astype(int)[1:-1])
            agree = True
            for i in sample:
                try:
                    multipliers = floquet_check(curve.points[i], curve.params, tol=tol)
                except (ShootingError, IntegrationError) as ex:
                    logger.warning(f"Floquet check failed at e0 = {abs(curve.points[i].e0):.6g}: {ex}")
                    agree = False
                    continue
                if is_stable(multipliers) != segment.stable:
                    logger.warning(
                        f"Floquet multipliers disagree with the slope label of segment {index} at "
                        f"e0 = {abs(curve.points[i].e0):.6g} (max |multiplier| {np.max(np.abs(multipliers)):.6g})."
                    )
                    agree = False
            checked.append(dataclasses.replace(segment, verified=agree))
        segments = checked

    return dataclasses.replace(curve, folds=tuple(folds), segments=tuple(segments))


def _landing(curve: ResponseCurve, index: int, e_in: float) -> Optional[TripletSolution]:
    """Point of segment ``index`` with input field modulus ``e_in``."""
    segment = curve.segments[index]
    folds = curve.folds
    xs = [abs(curve.points[i].e0) for i in range(segment.start, segment.stop + 1)]
    values = [abs(curve.points[i].e_in) for i in range(segment.start, segment.stop + 1)]
    if index > 0:
        xs.insert(0, folds[index - 1].e0_star)
        values.insert(0, folds[index - 1].e_in_star)
    if index < len(folds):
        xs.append(folds[index].e0_star)
        values.append(folds[index].e_in_star)

    for k in range(len(xs) - 1):
        lo, hi = values[k] - e_in, values[k + 1] - e_in
        if lo == 0:
            return curve.solve(xs[k])
        if lo * hi < 0 and xs[k] < xs[k + 1]:
            e0 = brentq(lambda x: abs(curve.solve(x).e_in) - e_in, xs[k], xs[k + 1], xtol=1e-14, rtol=1e-12)
            return curve.solve(e0)
    if values and values[-1] == e_in:
        return curve.solve(xs[-1])
    return None


def hysteresis(curve: ResponseCurve, direction: Direction) -> HysteresisReport:
    """
    Jumps met when sweeping the input field along the stable segments of a classified curve.

    The sweep stays on the current stable segment until it ends at a turning point, then jumps to the nearest stable
    segment that reaches the same input field.

    Parameters
    ----------
    curve: ResponseCurve
        Response curve, classified with :func:`classify_branches` (classified here when not).
    direction: Direction
        Sweep direction.

    Returns
    -------
    HysteresisReport
        Jumps in sweep order.
    """
    direction = Direction(direction)
    if not curve.segments:
        curve = classify_branches(curve)
    segments = curve.segments
    folds = curve.folds
    stable_ids = [k for k, s in enumerate(segments) if s.stable]
    if not stable_ids:
        return HysteresisReport(direction=direction)

    up = direction == Direction.up
    current = stable_ids[0] if up else stable_ids[-1]
    jumps = []
    while True:
        fold_index = current if up else current - 1
        if not 0 <= fold_index < len(folds):
            break
        fold = folds[fold_index]
        if fold.kind != (FoldKind.upper if up else FoldKind.lower):
            break
        candidates = [
            k for k in stable_ids if (k > current if up else k < current) and segments[k].covers(fold.e_in_star)
        ]
        if not candidates:
            logger.warning(f"No stable branch to jump to at |e_in| = {fold.e_in_star:.6g}.")
            break
        target = candidates[0] if up else candidates[-1]
        landing = _landing(curve, target, fold.e_in_star)
        if landing is None:
            logger.warning(f"Could not locate the landing point at |e_in| = {fold.e_in_star:.6g}.")
            break
        before = curve.solve(fold.e0_star)
        jumps.append(
            Jump(
                e_in=fold.e_in_star,
                kind=fold.kind,
                before=before.moduli,
                after=landing.moduli,
                from_segment=current,
                to_segment=target,
            )
        )
        current = target
    return HysteresisReport(direction=direction, jumps=tuple(jumps))


def replay_hysteresis(
    params: ModelParams,
    e_in_values: Sequence[float],
    direction: Direction,
    settle_tol: float = 1e-9,
    max_periods: int = 5000,
    tol: float = 1e-10,
    samples: int = 512,
    jump_ratio: float = 2.0,
    progress: bool = False,
) -> HysteresisReport:
    """
    Replay a hysteresis sweep with the time-domain integrator, warm-starting each point from the previous orbit.

    A jump is recorded where ``|e0|`` changes by more than ``jump_ratio`` times the input field step.

    Parameters
    ----------
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    e_in_values: sequence of float
        Input field moduli, visited in ``direction`` order.
    direction: Direction
        Sweep direction.
    settle_tol, max_periods, tol, samples:
        Passed to :func:`~obsideband.bloch.settle`.
    jump_ratio: float, optional
        Threshold on ``|delta |e0|| / |delta |e_in||``.
    progress: bool, optional
        Show a progress bar.

    Returns
    -------
    HysteresisReport
        Jumps in sweep order.
    """
    if params.epsilon == 0:
        raise ParamError("epsilon", "the hysteresis replay needs epsilon != 0")
    direction = Direction(direction)
    values = sorted((float(v) for v in e_in_values), reverse=direction == Direction.down)
    kind = FoldKind.upper if direction == Direction.up else FoldKind.lower

    jumps = []
    state = None
    prev: Optional[Tuple[float, Moduli]] = None
    for e_in in tqdm(values, desc="Replaying", disable=not progress, leave=False):
        trajectory = settle(e_in, params, settle_tol=settle_tol, max_periods=max_periods, tol=tol, initial=state)
        state = trajectory.final_state
        modes = extract_harmonics(trajectory, params.epsilon, n_max=1, samples=samples).modes
        moduli = (abs(modes[0]), abs(modes[1]), abs(modes[-1]))
        if prev is not None and abs(moduli[0] - prev[1][0]) > jump_ratio * abs(e_in - prev[0]):
            logger.debug(f"Jump between |e_in| = {prev[0]:.6g} and {e_in:.6g}.")
            jumps.append(Jump(e_in=e_in, kind=kind, before=prev[1], after=moduli))
        prev = (e_in, moduli)
    return HysteresisReport(direction=direction, jumps=tuple(jumps))
