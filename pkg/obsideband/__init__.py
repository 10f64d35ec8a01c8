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

from obsideband.bloch import AtomicState, HarmonicSolution, Trajectory, extract_harmonics, integrate, settle
from obsideband.compare import Comparison, compare, compare_point
from obsideband.config import RunConfig, parse_config
from obsideband.enums import Direction, FoldKind, Mode, OutputFormat, Spacing
from obsideband.floquet import floquet_check
from obsideband.params import DerivedParams, ModelParams, derive
from obsideband.resonant import ResonantPoint, input_from_output, output_branches
from obsideband.sideband import TripletSolution, solve_triplet
from obsideband.sweep import ResponseCurve, classify_branches, hysteresis, sweep, turning_points


__all__ = [
    "AtomicState",
    "Comparison",
    "DerivedParams",
    "Direction",
    "FoldKind",
    "HarmonicSolution",
    "Mode",
    "ModelParams",
    "OutputFormat",
    "ResonantPoint",
    "ResponseCurve",
    "RunConfig",
    "Spacing",
    "Trajectory",
    "TripletSolution",
    "classify_branches",
    "compare",
    "compare_point",
    "derive",
    "extract_harmonics",
    "floquet_check",
    "hysteresis",
    "input_from_output",
    "integrate",
    "output_branches",
    "parse_config",
    "settle",
    "solve_triplet",
    "sweep",
    "turning_points",
]
