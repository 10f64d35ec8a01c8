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
import itertools
import logging
import sys
import time
from threading import Thread
from typing import IO, Optional, Union

import numpy as np
from tqdm.auto import tqdm

logger = logging.getLogger(__name__)


def relative_error(value: complex, reference: complex) -> float:
    """Return ``|value - reference| / |reference|``, treating two zeros as an exact match."""
    diff = abs(value - reference)
    if diff == 0:
        return 0.0
    return diff / abs(reference) if reference != 0 else float("inf")


def format_float(value: float) -> str:
    """Format a float losslessly (17 significant digits)."""
    return f"{value:.17g}"


def hybrid_grid(radius: float, points: int = 2000, log_decades: float = 6.0) -> np.ndarray:
    """
    Grid on (0, radius], half logarithmically spaced over ``log_decades`` decades below ``radius``, half linear.

    Parameters
    ----------
    radius: float
        Upper end of the grid (> 0).
    points: int, optional
        Approximate number of grid points.
    log_decades: float, optional
        Span of the logarithmic half, in decades.

    Returns
    -------
    numpy.ndarray
        Sorted, unique, strictly positive grid.
    """
    if not radius > 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    if points < 4:
        raise ValueError(f"points must be >= 4, got {points}")
    half = points // 2
    log_part = np.logspace(np.log10(radius) - log_decades, np.log10(radius), half)
    lin_part = np.linspace(0, radius, points - half + 1)[1:]
    return np.unique(np.concatenate([log_part, lin_part]))


class Spinner(Thread):
    def __init__(
        self, label: str = "", interval: float = 0.2, leave: Union[bool, str] = True, file: Optional[IO] = None, **kwargs
    ):
        """
        Thread sub-class showing a spinner while a long computation (e.g. settling an orbit) runs.

        Parameters
        ----------
        label: str, optional
            Prepend spinner with this label.
        interval: float, optional
            Spinner update interval (s).
        leave: optional, bool, str
            What to do with the spinner display on stop():
                False: clear the label + spinner.
                True:  leave the label + spinner as is.
                <string message>: print this message in place of the spinner
        file: file-like, optional
            Stream to write to.  Defaults to ``sys.stderr``.
        kwargs: optional
            Additional kwargs to pass to Thread.__init__()
        """
        Thread.__init__(self, daemon=True, **kwargs)
        self._label = label
        self._interval = interval
        self._run = True
        self._leave = leave
        self._file = file or sys.stderr

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.stop()
        self.join()

    def run(self):
        """Run the spinner thread."""
        for cursor in itertools.cycle(r"/-\|"):
            if not self._run:
                break
            tqdm.write("\r" + self._label + cursor, file=self._file, end="")
            self._file.flush()
            time.sleep(self._interval)

        if self._leave is True:
            tqdm.write("", file=self._file, end="\n")
        elif self._leave is False:
            tqdm.write("\r", file=self._file, end="")
        else:
            tqdm.write("\r" + self._label + str(self._leave) + " ", file=self._file, end="\n")
        self._file.flush()

    def stop(self):
        """Stop the spinner thread."""
        self._run = False
