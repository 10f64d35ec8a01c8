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
import csv
import dataclasses
import io
import json
import logging
import pathlib
import re
import sys
from types import SimpleNamespace
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np
from tabulate import tabulate

from obsideband import version
from obsideband.bloch import extract_harmonics, settle
from obsideband.compare import compare
from obsideband.config import RunConfig, parse_config, schema_table
from obsideband.enums import Direction, Mode, OutputFormat
from obsideband.errors import ConfigError, ObsidebandError, ParamError
from obsideband.resonant import resonant_curve, resonant_folds
from obsideband.sweep import classify_branches, e0_grid, hysteresis, sweep
from obsideband.utils import Spinner, format_float

logger = logging.getLogger(__name__)

# yapf: disable
resonant_columns = ['e_t_abs', 'e_in_abs', 'e_t_re', 'e_t_im', 'e_in_re', 'e_in_im', 's0', 'sm_re', 'sm_im', 'stable']
sideband_columns = [
    'e0_abs', 'e_in_abs', 'e0_re', 'e0_im', 'ep1_abs', 'em1_abs', 'a0_re', 'a0_im', 'a1_re', 'a1_im', 'am1_re',
    'am1_im', 'slope_sign', 'stable'
]
oracle_columns = ['t', 's0', 'sm_re', 'sm_im', 'e_t_re', 'e_t_im']
compare_columns = ['e0_abs', 'e_in_abs', 'ratio', 'tolerance', 'err_a0', 'err_a1', 'err_am1', 'within']
# yapf: enable

# number of central amplitudes compared when none are given
_default_compare_points = 5


class PlainInfoFormatter(logging.Formatter):
    """logging formatter to format INFO logs without the module name etc prefix"""

    def format(self, record):
        if record.levelno == logging.INFO:
            self._style._fmt = "%(message)s"
        else:
            self._style._fmt = "%(levelname)s:%(name)s: %(message)s"
        return super().format(record)


class ConfigFailure(click.ClickException):
    """Invalid configuration (exit code 1)."""

    exit_code = 1


class NumericalFailure(click.ClickException):
    """A solver or integrator failed (exit code 2)."""

    exit_code = 2


class SimCommand(click.Command):
    """click Command sub-class that maps library errors to exit codes, and strips RST markup from help."""

    def get_help(self, ctx):
        """Strip some RST markup from the help text for CLI display."""
        if not hasattr(self, "click_wrap_text"):
            self.click_wrap_text = click.formatting.wrap_text

        sub_strings = {
            "\b\n": "\n\b",  # convert from RST friendly to click literal (unwrapped) block marker
            "::": ":",  # convert from RST '::' to ':'
            "``(.*?)``": r"\g<1>",  # convert from RST '``literal``' to 'literal'
            ":option:`(.*?)`": r"\g<1>",  # convert ':option:`--name`' to '--name'
        }  # yapf: disable

        def reformat_text(text, width, **kwargs):
            for sub_key, sub_value in sub_strings.items():
                text = re.sub(sub_key, sub_value, text, flags=re.DOTALL)
            return self.click_wrap_text(text, width, **kwargs)

        click.formatting.wrap_text = reformat_text
        return click.Command.get_help(self, ctx)

    def invoke(self, ctx):
        """Run the command, converting library errors into click exceptions."""
        try:
            return click.Command.invoke(self, ctx)
        except (ConfigError, ParamError) as ex:
            raise ConfigFailure(str(ex)) from ex
        except ObsidebandError as ex:
            raise NumericalFailure(str(ex)) from ex


def _configure_logging(verbosity):
    """configure python logging level"""
    log_level = max(10, 20 - 10 * verbosity)

    # limit logging config to obsideband by applying to package logger, rather than root logger
    # pkg_logger level etc are then 'inherited' by logger = getLogger(__name__) in the modules
    pkg_logger = logging.getLogger(__package__)
    for handler in list(pkg_logger.handlers):
        if isinstance(handler.formatter, PlainInfoFormatter):
            pkg_logger.removeHandler(handler)
    formatter = PlainInfoFormatter()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)
    pkg_logger.addHandler(handler)
    pkg_logger.setLevel(log_level)
    logging.captureWarnings(True)


def _config_cb(ctx, param, value):
    """click callback to read and validate the configuration file"""
    try:
        with click.open_file(value, encoding="utf-8") as f:
            return parse_config(f.read())
    except ConfigError as ex:
        raise ConfigFailure(str(ex)) from ex
    except (OSError, UnicodeDecodeError) as ex:
        raise ConfigFailure(f"Could not read configuration file {value}: {ex}") from ex


def _complex_cb(ctx, param, value):
    """click callback to parse complex field values, e.g. '0.3' or '0.3+0.1j'"""
    if value is None:
        return None

    def parse(text):
        try:
            return complex(text.replace(" ", ""))
        except ValueError:
            raise click.BadParameter(f"Invalid complex value: {text}.", param=param)

    return tuple(parse(v) for v in value) if isinstance(value, tuple) else parse(value)


def _cell(value: Any) -> str:
    """Format a CSV cell."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(float(value))


def _json_value(value: Any) -> Any:
    """Convert numpy scalars, enums and dataclasses for JSON output."""
    if dataclasses.is_dataclass(value):
        return {k: _json_value(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {k: _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if hasattr(value, "value"):
        return value.value
    return value


def _render(
    config: RunConfig, columns: Sequence[str], rows: List[Sequence[Any]], extra: Optional[Dict[str, Any]] = None
) -> str:
    """Render result rows as CSV or JSON, according to the configuration."""
    resolved = config.to_dict()
    if config.output.format == OutputFormat.json:
        document = dict(config=resolved, columns=list(columns), rows=[dict(zip(columns, row)) for row in rows])
        document.update(extra or {})
        return json.dumps(_json_value(document), sort_keys=True, indent=2) + "\n"

    buffer = io.StringIO()
    buffer.write(f"# config: {json.dumps(resolved, sort_keys=True)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([[_cell(v) for v in row] for row in rows])
    return buffer.getvalue()


def _write_output(text: str, path: Optional[str]):
    """Write rendered output to ``path``, or to stdout when ``path`` is None.  Removes partial files on failure."""
    if path is None:
        click.echo(text, nl=False)
        return
    path = pathlib.Path(path)
    try:
        with open(path, "w", encoding="utf8", newline="") as f:
            f.write(text)
    except Exception:
        if path.exists():
            path.unlink()
        raise
    logger.info(f"Wrote {path}")


def _resolve_output(config: RunConfig, output: Optional[str]) -> RunConfig:
    """Apply the --output override."""
    if output is None:
        return config
    return dataclasses.replace(config, output=dataclasses.replace(config.output, path=output))


def _moduli_str(moduli) -> str:
    return ", ".join(f"{m:.6g}" for m in moduli)


def _fold_table(folds) -> str:
    headers = dict(kind="Kind", e_in_star="|E_in|", e0_star="|e0|", index_interval="Grid indices")
    data = [
        dict(kind=f.kind.value, e_in_star=f.e_in_star, e0_star=f.e0_star, index_interval=f.index_interval)
        for f in folds
    ]
    return tabulate(data, headers=headers, floatfmt=".8g")


config_argument = click.argument(
    "config", type=click.Path(exists=True, dir_okay=False, allow_dash=True), callback=_config_cb
)
output_option = click.option(
    "-o",
    "--output",
    type=click.Path(exists=False, dir_okay=False, writable=True),
    default=None,
    show_default="the configured output path, or stdout.",
    help="File to write results to.",
)


# obsideband CLI and command group
@click.group()
@click.option("--verbose", "-v", count=True, help="Increase verbosity.")
@click.option("--quiet", "-q", count=True, help="Decrease verbosity.")
@click.version_option(version=version.__version__, message="%(version)s")
@click.pass_context
def cli(ctx, verbose, quiet):
    """Simulate the multi-mode output field of two-level atoms driven in a squeezed vacuum."""
    ctx.obj = SimpleNamespace()
    verbosity = verbose - quiet
    _configure_logging(verbosity)


@click.command(cls=SimCommand)
@config_argument
@output_option
def resonant_sweep(config: RunConfig, output):
    # @formatter:off
    """
    Compute the resonant response curve.

    Sweeps the total field modulus over the configured grid (``sweep.e0_min`` to ``sweep.e0_max``), along the family
    of stationary states with a real, positive input field.  Each row holds the stationary state and its linear
    stability.  ``model.epsilon`` is set to 0.
    \b

    Examples
    --------

    Write the resonant curve for a configuration to a CSV file::

        obsideband resonant-sweep resonant.json -o resonant.csv
    """
    # @formatter:on
    config = _resolve_output(config, output)
    params = config.model
    if params.epsilon != 0:
        logger.warning(f"resonant-sweep uses epsilon = 0 (configured {params.epsilon}).")
        params = params.replace(epsilon=0.0)
        config = dataclasses.replace(config, model=params)

    grid = e0_grid(config.sweep.e0_min, config.sweep.e0_max, config.sweep.points, config.sweep.spacing)
    with Spinner(label="Computing resonant curve: ", leave=" "):
        points = resonant_curve(params, grid)
        folds = resonant_folds(points, params)

    if folds:
        logger.info(f"Turning points:\n\n{_fold_table(folds)}\n")
    else:
        logger.info("Monotone response, no turning points.\n")

    # yapf: disable
    rows = [
        [abs(p.e_t), abs(p.e_in), p.e_t.real, p.e_t.imag, p.e_in.real, p.e_in.imag, p.s0_eq, p.sm_eq.real,
         p.sm_eq.imag, p.stable]
        for p in points
    ]
    # yapf: enable
    _write_output(_render(config, resonant_columns, rows, dict(turning_points=folds)), config.output.path)


cli.add_command(resonant_sweep)


@click.command(cls=SimCommand)
@config_argument
@output_option
@click.option(
    "--hysteresis/--no-hysteresis",
    "with_hysteresis",
    default=False,
    show_default=True,
    help="Report the jumps of up and down sweeps of the input field.",
)
@click.option(
    "--verify/--no-verify",
    default=False,
    show_default=True,
    help="Check branch stability labels against Floquet multipliers.",
)
def sideband_sweep(config: RunConfig, output, with_hysteresis, verify):
    # @formatter:off
    """
    Compute the central and first sideband response curves.

    Solves the harmonic balance triplet over the configured grid of central amplitudes (``sweep.e0_min`` to
    ``sweep.e0_max``), finds the turning points of the input field, and labels branch stability.  Requires a
    non-zero ``model.epsilon``.
    \b

    Examples
    --------

    Sweep with hysteresis reports, writing JSON::

        obsideband sideband-sweep sideband.json --hysteresis -o sideband.json

    Verify branch labels with Floquet multipliers, with debug logging::

        obsideband -v sideband-sweep sideband.json --verify -o sideband.csv
    """
    # @formatter:on
    config = _resolve_output(config, output)
    params = config.model
    if params.epsilon == 0:
        raise ConfigError("model.epsilon", "sideband-sweep needs epsilon != 0")

    grid = e0_grid(config.sweep.e0_min, config.sweep.e0_max, config.sweep.points, config.sweep.spacing)
    with Spinner(label="Computing sideband curves: ", leave=" "):
        curve = sweep(grid, params, depth=config.solver.depth, num_threads=config.solver.threads)
        curve = classify_branches(curve, verify=verify, tol=config.solver.tol)

    if curve.folds:
        logger.info(f"Turning points:\n\n{_fold_table(curve.folds)}\n")
    else:
        logger.info("Monotone response, no turning points.\n")

    extra: Dict[str, Any] = dict(turning_points=curve.folds, segments=curve.segments, gaps=curve.gaps)
    if with_hysteresis:
        reports = [hysteresis(curve, direction) for direction in Direction]
        headers = dict(direction="Direction", e_in="|E_in|", before="Before", after="After")
        data = [
            dict(direction=r.direction.value, e_in=j.e_in, before=_moduli_str(j.before), after=_moduli_str(j.after))
            for r in reports
            for j in r.jumps
        ]
        logger.info(f"Hysteresis jumps (|E0|, |E+1|, |E-1|):\n\n{tabulate(data, headers=headers, floatfmt='.8g')}\n")
        extra["hysteresis"] = reports

    labels = curve.stable
    rows = []
    for point, slope_sign, stable in zip(curve.points, curve.slope_signs, labels):
        # yapf: disable
        rows.append([
            abs(point.e0), abs(point.e_in), point.e0.real, point.e0.imag, abs(point.mode(Mode.red)),
            abs(point.mode(Mode.blue)), point.a0.real, point.a0.imag, point.a1.real, point.a1.imag, point.am1.real,
            point.am1.imag, int(slope_sign), bool(stable)
        ])
        # yapf: enable
    _write_output(_render(config, sideband_columns, rows, extra), config.output.path)


cli.add_command(sideband_sweep)


@click.command(cls=SimCommand)
@config_argument
@click.option(
    "-e", "--e-in", type=click.STRING, required=True, callback=_complex_cb, help="Input field, e.g. 0.3 or 0.3+0.1j."
)
@output_option
def oracle(config: RunConfig, e_in, output):
    # @formatter:off
    """
    Settle the time-domain Bloch equations at an input field.

    Integrates from the undriven ground state until the orbit settles, then writes one period of it (or the single
    fixed point), and logs its harmonics up to ``solver.n_max``.
    \b

    Examples
    --------

    Settle an orbit on the lower branch::

        obsideband oracle sideband.json --e-in 0.3 -o orbit.csv
    """
    # @formatter:on
    config = _resolve_output(config, output)
    params = config.model
    solver = config.solver
    with Spinner(label=f"Settling orbit at E_in = {e_in}: ", leave=" "):
        trajectory = settle(
            e_in,
            params,
            settle_tol=solver.settle_tol,
            max_periods=solver.max_periods,
            tol=solver.tol,
            samples=solver.samples,
        )
    harmonics = extract_harmonics(trajectory, params.epsilon, n_max=solver.n_max, samples=solver.samples)

    indices = range(-solver.n_max, solver.n_max + 1)
    table = [dict(n=n, a=abs(harmonics.a[n]), b=abs(harmonics.b[n]), mode=abs(harmonics.modes[n])) for n in indices]
    headers = dict(n="n", a="|a_n|", b="|b_n|", mode="|E_n|")
    logger.info(f"Harmonics:\n\n{tabulate(table, headers=headers, floatfmt='.8g')}\n")

    rows = [
        [t, s0, sm.real, sm.imag, e_t.real, e_t.imag]
        for t, s0, sm, e_t in zip(trajectory.times, trajectory.s0, trajectory.sm, trajectory.fields_total)
    ]
    # yapf: disable
    harmonic_rows = [
        dict(n=n, a_re=harmonics.a[n].real, a_im=harmonics.a[n].imag, b_re=harmonics.b[n].real,
             b_im=harmonics.b[n].imag, mode_re=harmonics.modes[n].real, mode_im=harmonics.modes[n].imag)
        for n in indices
    ]
    # yapf: enable
    _write_output(_render(config, oracle_columns, rows, dict(harmonics=harmonic_rows)), config.output.path)


cli.add_command(oracle)


@click.command(name="compare", cls=SimCommand)
@config_argument
@click.option(
    "-e",
    "--e0",
    "e0_values",
    type=click.STRING,
    multiple=True,
    callback=_complex_cb,
    show_default=f"{_default_compare_points} points spanning the configured sweep.",
    help="Central amplitude to compare at.  Can be used multiple times.",
)
@output_option
def compare_cmd(config: RunConfig, e0_values, output):
    # @formatter:off
    """
    Compare the harmonic balance triplet with the time-domain orbit.

    At each central amplitude, the triplet is solved and the orbit at the matching input field is settled (warm-started
    from the triplet).  Relative errors of ``a0``, ``a1`` and ``a-1`` are reported against the orbit harmonics,
    with the acceptance tolerance ``max(1%, 10 ratio^2)``, where ``ratio`` is the triplet sideband ratio.
    \b

    Examples
    --------

    Compare at two weak-field points::

        obsideband compare sideband.json --e0 0.01 --e0 0.02 -o compare.csv
    """
    # @formatter:on
    config = _resolve_output(config, output)
    params = config.model
    if params.epsilon == 0:
        raise ConfigError("model.epsilon", "compare needs epsilon != 0")
    solver = config.solver
    if not e0_values:
        e0_values = np.linspace(config.sweep.e0_min, config.sweep.e0_max, _default_compare_points)

    comparisons = compare(
        e0_values,
        params,
        progress=True,
        depth=solver.depth,
        settle_tol=solver.settle_tol,
        max_periods=solver.max_periods,
        tol=solver.tol,
        samples=solver.samples,
    )
    # yapf: disable
    rows = [
        [abs(c.e0), abs(c.e_in), c.ratio, c.tolerance, c.err_a0, c.err_a1, c.err_am1, c.within]
        for c in comparisons
    ]
    # yapf: enable
    table = [dict(zip(compare_columns, row)) for row in rows]
    logger.info(f"Comparison:\n\n{tabulate(table, headers='keys', floatfmt='.4g')}\n")
    _write_output(_render(config, compare_columns, rows), config.output.path)


cli.add_command(compare_cmd)


@click.command(cls=SimCommand)
def schema():
    """Print the configuration file schema."""
    logger.info(f"Configuration keys:\n\n{schema_table()}\n")


cli.add_command(schema)
