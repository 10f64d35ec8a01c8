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

from enum import Enum


class Spacing(str, Enum):
    """Enumeration for the spacing of a central amplitude grid."""

    linear = "linear"
    """ Uniformly spaced amplitudes. """

    log = "log"
    """ Logarithmically spaced amplitudes (requires a positive lower bound). """


class OutputFormat(str, Enum):
    """Enumeration for the result file format."""

    csv = "csv"
    """ Comma separated values, with the resolved configuration as a comment line. """

    json = "json"
    """ JSON document with the table rows plus turning point and hysteresis arrays. """


class Direction(str, Enum):
    """Enumeration for the direction of an input field sweep."""

    up = "up"
    """ Increasing input amplitude. """

    down = "down"
    """ Decreasing input amplitude. """


class FoldKind(str, Enum):
    """Enumeration for the kind of turning point of an S-shaped response."""

    lower = "lower-fold"
    """ Local minimum of the input amplitude, where a down-sweep leaves the upper branch. """

    upper = "upper-fold"
    """ Local maximum of the input amplitude, where an up-sweep leaves the lower branch. """


class Mode(str, Enum):
    """Enumeration for the output field modes."""

    central = "central"
    """ The central mode at the pump frequency. """

    red = "red"
    """ The red-shifted sideband (index +1). """

    blue = "blue"
    """ The blue-shifted sideband (index -1). """
