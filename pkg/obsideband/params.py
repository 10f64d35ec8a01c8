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
"""Physical model parameters and the derived complex constants shared by every solver."""

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict

from obsideband.errors import ParamError


@dataclass(frozen=True)
class DerivedParams:
    """Complex constants derived from :class:`ModelParams`."""

    omega_c: complex
    """ Complex detuning ``delta - i (gamma / 2) cosh(2r)``. """

    q: complex
    """ Squeezing coupling ``(gamma / 2) exp(i theta) sinh(2r)``. """

    lambda_c: complex
    """ Polarization feedback constant ``i (gamma / 2) n_eff``. """

    cosh2r: float
    sinh2r: float

    @property
    def delta_omega_q(self) -> float:
        """``|omega_c|^2 - |q|^2``, the determinant of the resonant fixed point system."""
        return abs(self.omega_c) ** 2 - abs(self.q) ** 2


@dataclass(frozen=True)
class ModelParams:
    """
    Physical parameters of N two-level atoms driven by a coherent pump in a broadband squeezed vacuum.

    All rates share the unit of ``gamma``.  ``theta`` is reduced to [0, 2*pi) on construction.

    Parameters
    ----------
    n_eff: float
        Effective atom number (> 0).
    gamma: float, optional
        Atomic damping rate (> 0).
    r: float, optional
        Squeeze parameter (>= 0).
    theta: float, optional
        Phase of the squeezed field relative to the pump (rad).
    delta: float, optional
        Atom-pump detuning.
    epsilon: float, optional
        Twice the pump-squeezed carrier detuning.  Zero selects the resonant (time independent) problem.
    mu: float, optional
        Dipole moment (> 0).
    """

    n_eff: float
    gamma: float = 1.0
    r: float = 0.0
    theta: float = 0.0
    delta: float = 0.0
    epsilon: float = 0.0
    mu: float = 1.0

    # dynamic frequency shift of the squeezed reservoir, neglected
    nu = 0.0

    def __post_init__(self):
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParamError(field.name, f"expected a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParamError(field.name, f"must be finite, got {value!r}")
            object.__setattr__(self, field.name, float(value))

        for name in ("gamma", "n_eff", "mu"):
            if getattr(self, name) <= 0:
                raise ParamError(name, f"must be > 0, got {getattr(self, name)!r}")
        if self.r < 0:
            raise ParamError("r", f"must be >= 0, got {self.r!r}")
        # cosh(2r) overflows double precision beyond this
        if self.r > 177:
            raise ParamError("r", f"must be <= 177, got {self.r!r}")

        theta = self.theta % (2 * math.pi)
        object.__setattr__(self, "theta", 0.0 if theta == 2 * math.pi else theta)

    @cached_property
    def derived(self) -> DerivedParams:
        """The derived constants (see :func:`derive`)."""
        return derive(self)

    @property
    def period(self) -> float:
        """Drive period ``2*pi / |epsilon|``, or ``inf`` for the resonant problem."""
        return 2 * math.pi / abs(self.epsilon) if self.epsilon != 0 else math.inf

    def replace(self, **kwargs) -> "ModelParams":
        """Return a validated copy with the given fields replaced."""
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> Dict[str, Any]:
        """Return the parameters as a plain dictionary."""
        return dataclasses.asdict(self)


def derive(params: ModelParams) -> DerivedParams:
    """
    Compute the derived complex constants of a parameter set.

    Parameters
    ----------
    params: ModelParams
        Model parameters.

    Returns
    -------
    DerivedParams
        Derived constants.
    """
    if not isinstance(params, ModelParams):
        raise TypeError(f"Expected ModelParams, got {type(params).__name__}")
    # re-validate, in case the instance was built around __post_init__
    ModelParams(**params.to_dict())

    gamma = params.gamma
    cosh2r = math.cosh(2 * params.r)
    sinh2r = math.sinh(2 * params.r)
    omega_c = complex(params.delta, -0.5 * gamma * cosh2r)
    q = 0.5 * gamma * sinh2r * complex(math.cos(params.theta), math.sin(params.theta))
    lambda_c = complex(0.0, 0.5 * gamma * params.n_eff)
    return DerivedParams(omega_c=omega_c, q=q, lambda_c=lambda_c, cosh2r=cosh2r, sinh2r=sinh2r)
