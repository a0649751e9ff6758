#####################################################################
#                                                                   #
# /model/model_file.py                                              #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""Reading and writing the plain-text model file format.

A model file is UTF-8, line oriented, with ``#`` starting a comment. Sections are
introduced by a name in square brackets and hold ``key = value`` entries::

    [model]
    n = 2

    [inputs]
    1 = 3
    2 = 3

    [flows]
    1<-2 = 2/3      # intensity q_12 of the flow from compartment 2 into 1
    2<-1 = 4/3

    [outputs]
    1 = 1/3
    2 = 5/3

    [initial]
    1 = 3
    2 = 3

See docs/source/model_file.rst for the full grammar.
"""
import logging
import math
import re
from pathlib import Path

from labscript_utils import dedent

from ..errors import ModelSyntaxError, ModelValidationError, EvaluationError
from .compartments import CompartmentalModel, SimulationDefaults, validate_model, ERROR
from .expressions import parse_expr, Number

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).parent / 'fixtures'

SECTIONS = ['model', 'params', 'inputs', 'flows', 'outputs', 'initial', 'simulate']
REQUIRED_SECTIONS = ['model', 'flows', 'initial']
_NAME = re.compile(r'[^\W\d]\w*$')
_SIMULATE_KEYS = {
    't0': float,
    't1': float,
    'samples': int,
    'rtol': float,
    'atol': float,
    'max_step': float,
    'clip': None,
}


class _Entry(object):
    def __init__(self, key, value, line, key_column, value_column):
        self.key = key
        self.value = value
        self.line = line
        self.key_column = key_column
        self.value_column = value_column

    def error(self, message, at_value=False):
        column = self.value_column if at_value else self.key_column
        return ModelSyntaxError(message, self.line, column)


def _split_sections(src):
    sections = {}
    current = None
    for lineno, raw in enumerate(src.splitlines(), start=1):
        text = raw.split('#', 1)[0].rstrip()
        stripped = text.strip()
        if not stripped:
            continue
        indent = len(text) - len(text.lstrip())
        if stripped.startswith('['):
            if not stripped.endswith(']'):
                raise ModelSyntaxError("unterminated section header", lineno, indent + 1)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                msg = f"unknown section [{name}]"
                raise ModelSyntaxError(msg, lineno, indent + 1)
            if name in sections:
                raise ModelSyntaxError(f"duplicate section [{name}]", lineno, indent + 1)
            sections[name] = current = []
            continue
        if current is None:
            raise ModelSyntaxError("entry outside of any section", lineno, indent + 1)
        key, sep, value = text.partition('=')
        if not sep:
            raise ModelSyntaxError("expected 'key = value'", lineno, indent + 1)
        value_column = len(key) + 2 + (len(value) - len(value.lstrip()))
        if not value.strip():
            raise ModelSyntaxError("missing value", lineno, value_column)
        if not key.strip():
            raise ModelSyntaxError("missing key", lineno, indent + 1)
        entry = _Entry(key.strip(), value.strip(), lineno, indent + 1, value_column)
        current.append(entry)
    for name in REQUIRED_SECTIONS:
        if name not in sections:
            raise ModelSyntaxError(f"required section [{name}] is missing")
    return sections


def _parse_bool(entry):
    value = entry.value.lower()
    if value in ('true', 'yes', '1'):
        return True
    if value in ('false', 'no', '0'):
        return False
    raise entry.error(f"expected true or false, got {entry.value!r}", at_value=True)


def _constant(entry, params):
    """Parse and evaluate an entry whose value may only reference parameters"""
    expr = parse_expr(entry.value, entry.line, entry.value_column)
    unknown = expr.symbols() - set(params)
    if unknown:
        name = sorted(unknown)[0]
        raise entry.error(f"unknown identifier {name!r} in constant", at_value=True)
    try:
        value = expr.evaluate(params)
    except EvaluationError as e:
        raise entry.error(str(e), at_value=True) from None
    if not math.isfinite(value):
        raise entry.error("constant is not finite", at_value=True)
    return value


def _parse_header(entries):
    seen = {}
    for entry in entries:
        if entry.key not in ('n', 'names', 'self_flows'):
            raise entry.error(f"unknown key {entry.key!r} in [model]")
        if entry.key in seen:
            raise entry.error(f"duplicate key {entry.key!r} in [model]")
        seen[entry.key] = entry
    if 'n' not in seen:
        raise ModelSyntaxError("[model] section must declare n")
    try:
        n = int(seen['n'].value)
    except ValueError:
        raise seen['n'].error("n must be an integer", at_value=True) from None
    if n < 1:
        raise seen['n'].error("n must be at least 1", at_value=True)
    names = tuple(str(i + 1) for i in range(n))
    if 'names' in seen:
        entry = seen['names']
        names = tuple(name.strip() for name in entry.value.split(','))
        if len(names) != n:
            msg = f"{len(names)} names given for {n} compartments"
            raise entry.error(msg, at_value=True)
        for name in names:
            if not _NAME.match(name):
                msg = f"compartment name {name!r} is not a valid identifier"
                raise entry.error(msg, at_value=True)
        if len(set(names)) != n:
            raise entry.error("compartment names are not unique", at_value=True)
    self_flows = _parse_bool(seen['self_flows']) if 'self_flows' in seen else False
    locations = {f'model {key}': entry.line for key, entry in seen.items()}
    return names, self_flows, locations


def _compartment(text, names, entry):
    text = text.strip()
    if text.isdigit():
        index = int(text) - 1
        if not 0 <= index < len(names):
            msg = f"compartment index {text} out of range 1..{len(names)}"
            raise entry.error(msg)
        return index
    if text in names:
        return names.index(text)
    raise entry.error(f"unknown compartment {text!r}")


def parse_model(src):
    """Parse model file text into a validated :class:`CompartmentalModel`.

    Raises:
        ModelSyntaxError: For syntax errors, missing sections, duplicate entries and
            out of range compartment indices.
        ModelValidationError: If the parsed model fails :func:`validate_model`.
    """
    sections = _split_sections(src)
    names, self_flows, locations = _parse_header(sections['model'])
    n = len(names)

    params = {}
    for entry in sections.get('params', []):
        if not _NAME.match(entry.key):
            raise entry.error(f"parameter name {entry.key!r} is not a valid identifier")
        if entry.key in params:
            raise entry.error(f"duplicate parameter {entry.key!r}")
        params[entry.key] = _constant(entry, params)
        locations[f'params {entry.key}'] = entry.line

    def per_compartment(section, constant=False):
        values = {}
        for entry in sections.get(section, []):
            i = _compartment(entry.key, names, entry)
            if i in values:
                raise entry.error(f"duplicate entry for compartment {entry.key!r}")
            if constant:
                values[i] = _constant(entry, params)
            else:
                values[i] = parse_expr(entry.value, entry.line, entry.value_column)
            locations[f'{section} {i + 1}'] = entry.line
        return values

    inputs = per_compartment('inputs')
    outputs = per_compartment('outputs')
    initial = per_compartment('initial', constant=True)

    intensity = {}
    for entry in sections['flows']:
        receiver, sep, donor = entry.key.partition('<-')
        if not sep:
            raise entry.error(f"flow key {entry.key!r} must have the form 'i<-j'")
        i = _compartment(receiver, names, entry)
        j = _compartment(donor, names, entry)
        if (i, j) in intensity:
            raise entry.error(f"duplicate flow {i + 1}<-{j + 1}")
        intensity[(i, j)] = parse_expr(entry.value, entry.line, entry.value_column)
        locations[f'flows {i + 1}<-{j + 1}'] = entry.line

    simulate = {}
    for entry in sections.get('simulate', []):
        if entry.key not in _SIMULATE_KEYS:
            raise entry.error(f"unknown key {entry.key!r} in [simulate]")
        if entry.key in simulate:
            raise entry.error(f"duplicate key {entry.key!r} in [simulate]")
        convert = _SIMULATE_KEYS[entry.key]
        if convert is None:
            simulate[entry.key] = _parse_bool(entry)
            continue
        try:
            simulate[entry.key] = convert(entry.value)
        except ValueError:
            msg = f"invalid value {entry.value!r} for {entry.key}"
            raise entry.error(msg, at_value=True) from None

    zero = Number(0.0)
    model = CompartmentalModel(
        names=names,
        intensity=intensity,
        output_intensity=tuple(outputs.get(i, zero) for i in range(n)),
        inputs=tuple(inputs.get(i, zero) for i in range(n)),
        x0=tuple(initial.get(i, 0.0) for i in range(n)),
        params=params,
        self_flows=self_flows,
        simulate=SimulationDefaults(**simulate),
        locations=locations,
    )
    diagnostics = validate_model(model)
    for diagnostic in diagnostics:
        logger.warning(str(diagnostic))
    errors = [d for d in diagnostics if d.severity == ERROR]
    if errors:
        raise ModelValidationError(errors)
    return model


def serialize_model(model):
    """Write `model` in canonical model file form. Parsing the result gives a model
    equal to `model`."""
    default_names = tuple(str(i + 1) for i in range(model.n))
    lines = ['[model]', f'n = {model.n}']
    if model.names != default_names:
        lines.append('names = ' + ', '.join(model.names))
    if model.self_flows:
        lines.append('self_flows = true')

    lines += ['', '[params]']
    lines += [f'{name} = {value!r}' for name, value in model.params.items()]

    lines += ['', '[inputs]']
    for i, z in enumerate(model.inputs):
        if not z.is_zero():
            lines.append(f'{i + 1} = {z}')

    lines += ['', '[flows]']
    for (i, j), q in sorted(model.intensity.items()):
        lines.append(f'{i + 1}<-{j + 1} = {q}')

    lines += ['', '[outputs]']
    for i, w in enumerate(model.output_intensity):
        if not w.is_zero():
            lines.append(f'{i + 1} = {w}')

    lines += ['', '[initial]']
    lines += [f'{i + 1} = {float(v)!r}' for i, v in enumerate(model.x0)]

    s = model.simulate
    lines += [
        '',
        '[simulate]',
        f't0 = {float(s.t0)!r}',
        f't1 = {float(s.t1)!r}',
        f'samples = {int(s.samples)}',
        f'rtol = {float(s.rtol)!r}',
        f'atol = {float(s.atol)!r}',
        f'max_step = {float(s.max_step)!r}',
        f'clip = {"true" if s.clip else "false"}',
    ]
    return '\n'.join(lines) + '\n'


def load_model(path):
    """Read and parse a model file. OSError propagates; undecodable text is reported as
    a ModelSyntaxError."""
    try:
        src = Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        msg = f"""model file {path} is not valid UTF-8 (byte {e.start})"""
        raise ModelSyntaxError(dedent(msg)) from None
    return parse_model(src)


def fixture_path(name):
    """Path of a bundled model file, e.g. fixture_path('hallam')"""
    path = FIXTURES_DIR / f'{name}.model'
    if not path.exists():
        available = sorted(p.stem for p in FIXTURES_DIR.glob('*.model'))
        msg = f"""no bundled model named {name!r}; available models are
            {', '.join(available)}"""
        raise ValueError(dedent(msg))
    return path


def load_fixture(name):
    """Parse one of the bundled model files"""
    return load_model(fixture_path(name))
