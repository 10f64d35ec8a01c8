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
import json
import math
import pathlib

import pytest
from click.testing import CliRunner

from obsideband.params import ModelParams
from obsideband.sweep import ResponseCurve, classify_branches, e0_grid, sweep

# yapf: disable
driven_model = dict(n_eff=101, epsilon=2.0, r=0.5, delta=0, theta=math.pi)
# yapf: enable


def write_config(path: pathlib.Path, document: dict) -> pathlib.Path:
    """Write a JSON configuration document to ``path`` and return ``path``."""
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def driven_params() -> ModelParams:
    """Driven parameters with a bistable central mode and resolved sidebands."""
    return ModelParams(**driven_model)


@pytest.fixture(scope="session")
def resonant_params() -> ModelParams:
    """Resonant (epsilon = 0) parameters above the critical atom number."""
    return ModelParams(n_eff=101, r=0.5, theta=math.pi)


@pytest.fixture(scope="session")
def driven_curve(driven_params) -> ResponseCurve:
    """Classified response curve over e0 in [0, 20]."""
    return classify_branches(sweep(e0_grid(0, 20, 400), driven_params))


@pytest.fixture
def runner() -> CliRunner:
    """click test runner."""
    return CliRunner()


@pytest.fixture
def driven_config_file(tmp_path: pathlib.Path) -> pathlib.Path:
    """Configuration file with the driven parameters and a coarse sweep."""
    return write_config(tmp_path / "driven.json", dict(**driven_model, sweep=dict(points=200)))
