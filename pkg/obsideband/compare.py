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
"""Cross-validation of the harmonic balance triplet against harmonics of the settled time-domain orbit."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

from tqdm.auto import tqdm

from obsideband.bloch import HarmonicSolution, extract_harmonics, settle
from obsideband.errors import ParamError
from obsideband.params import ModelParams
from obsideband.sideband import TripletSolution, solve_triplet
from obsideband.utils import relative_error

logger = logging.getLogger(__name__)

# floor of the acceptance tolerance
min_tolerance = 0.01


def acceptance_tolerance(ratio: float) -> float:
    """Relative error allowed for a sideband ratio ``max(|a1|, |am1|) / |a0|``."""
    return max(min_tolerance, 10 * ratio**2)


@dataclass(frozen=True)
class Comparison:
    """Triplet and time-domain harmonics at one matched input field."""

    triplet: TripletSolution
    harmonics: HarmonicSolution
    ratio: float
    """ Sideband ratio of the triplet. """

    tolerance: float
    err_a0: float
    err_a1: float
    err_am1: float

    @property
    def e0(self) -> complex:
        return self.triplet.e0

    @property
    def e_in(self) -> complex:
        return self.triplet.e_in

    @property
    def within(self) -> bool:
        """Whether ``a0``, ``a1`` and ``am1`` all agree to :attr:`tolerance`."""
        return max(self.err_a0, self.err_a1, self.err_am1) <= self.tolerance


def compare_point(
    e0: complex,
    params: ModelParams,
    depth: Optional[int] = 2,
    settle_tol: float = 1e-9,
    max_periods: int = 5000,
    tol: float = 1e-10,
    samples: int = 512,
) -> Comparison:
    """
    Compare the triplet at ``e0`` with the orbit settled at the matching input field.

    Integration is warm-started from the triplet's orbit estimate, so the oracle lands on the same branch.

    Parameters
    ----------
    e0: complex
        Central output amplitude.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    depth: int, optional
        Continued fraction depth.
    settle_tol, max_periods, tol, samples:
        Passed to :func:`~obsideband.bloch.settle`.

    Returns
    -------
    Comparison
        Relative errors of ``a0``, ``a1`` and ``am1``, taking the time-domain harmonics as reference.
    """
    if params.epsilon == 0:
        raise ParamError("epsilon", "the comparison needs epsilon != 0")
    triplet = solve_triplet(e0, params, depth=depth)
    trajectory = settle(
        triplet.e_in,
        params,
        settle_tol=settle_tol,
        max_periods=max_periods,
        tol=tol,
        initial=triplet.initial_state(),
        samples=samples,
    )
    harmonics = extract_harmonics(trajectory, params.epsilon, n_max=1, samples=samples)
    ratio = triplet.sideband_ratio
    return Comparison(
        triplet=triplet,
        harmonics=harmonics,
        ratio=ratio,
        tolerance=acceptance_tolerance(ratio),
        err_a0=relative_error(triplet.a0, harmonics.a[0]),
        err_a1=relative_error(triplet.a1, harmonics.a[1]),
        err_am1=relative_error(triplet.am1, harmonics.a[-1]),
    )


def compare(e0_values: Sequence[complex], params: ModelParams, progress: bool = False, **kwargs) -> List[Comparison]:
    """
    Run :func:`compare_point` at each central amplitude.

    Parameters
    ----------
    e0_values: sequence of complex
        Central output amplitudes.
    params: ModelParams
        Model parameters, with ``epsilon != 0``.
    progress: bool, optional
        Show a progress bar.
    kwargs: optional
        Passed to :func:`compare_point`.

    Returns
    -------
    list of Comparison
        One comparison per value, in order.
    """
    comparisons = []
    for e0 in tqdm(e0_values, desc="Comparing", disable=not progress, leave=False):
        comparison = compare_point(e0, params, **kwargs)
        if not comparison.within:
            logger.warning(
                f"Triplet and time-domain harmonics differ at e0 = {abs(comparison.e0):.6g}: "
                f"a0 {comparison.err_a0:.3e}, a1 {comparison.err_a1:.3e}, am1 {comparison.err_am1:.3e} "
                f"(tolerance {comparison.tolerance:.3e})."
            )
        comparisons.append(comparison)
    return comparisons
