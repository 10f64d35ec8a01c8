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
from typing import Optional


class ObsidebandError(Exception):
    """Base exception class."""


class ParamError(ObsidebandError, ValueError):
    """Raised when a model parameter is non-finite or out of range."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"Invalid value for '{field}': {message}")


class ConfigError(ObsidebandError):
    """Raised when a configuration key is unknown, mistyped or violates an invariant."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"Invalid configuration key '{key}': {message}")


class IntegrationError(ObsidebandError):
    """Raised when the ODE integrator underflows its step size or produces a non-finite state."""

    def __init__(self, message: str, t_fail: float):
        self.t_fail = t_fail
        super().__init__(f"{message} (t = {t_fail:.6g})")


class SettleError(ObsidebandError):
    """Raised when a trajectory does not settle onto a periodic orbit or fixed point."""

    def __init__(self, residual: float, periods: int):
        self.residual = residual
        self.periods = periods
        super().__init__(
            f"Trajectory did not settle after {periods} periods (last stroboscopic residual {residual:.3e})."
        )


class DegenerateError(ObsidebandError):
    """Raised when the resonant input-output relation has a vanishing denominator."""


class SingularError(ObsidebandError):
    """Raised on a zero division in the recurrence coefficients, continued fractions or triplet solution."""

    def __init__(self, where: str, n: Optional[int] = None):
        self.where = where
        self.n = n
        at = f" at n = {n}" if n is not None else ""
        super().__init__(f"Singular {where}{at}.")


class SweepQualityError(ObsidebandError):
    """Raised when too many points of a sweep are singular."""


class ShootingError(ObsidebandError):
    """Raised when Newton shooting fails to converge to a periodic orbit."""


class HarmonicsError(ObsidebandError, ValueError):
    """Raised when a trajectory does not span one drive period."""
