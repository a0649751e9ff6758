#####################################################################
#                                                                   #
# /cli/commands.py                                                  #
#                                                                   #
# Copyright 2026, The ecoflux contributors                          #
#                                                                   #
# This file is part of ecoflux, and is licensed under the           #
# Simplified BSD License. See the LICENSE.txt file in the root of   #
# the project for the full license.                                 #
#                                                                   #
#####################################################################
"""The ecoflux command line tool.

Every command reads a model file, solves or loads the system it needs and writes its
results as CSV tables to the output directory. `report` runs every stage and adds a
manifest of the emitted files (and optionally an HDF5 archive of all tables).
"""
import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from pathlib import Path

import numpy as np
from tqdm import tqdm
from zprocess import rich_print

from ..__version__ import __version__
from ..diact import (
    COMPOSITE,
    SIMPLE,
    VARIANTS,
    DiactFlowIntegralBlock,
    diact_field,
    diact_storages,
    kind_label,
)
from ..errors import EcofluxError, EvaluationError, SolverError
from ..indicators import (
    FLOW,
    STORAGE,
    average_indices,
    diact_exposures,
    effect_indices,
    exposures,
    recovery_diagnostic,
    residence_times,
    transient_exposures,
    utility_indices,
    with_efficiency,
)
from ..interactions import (
    INDUCTIONS,
    Thresholds,
    classify_pair,
    global_scale_strengths,
    resolve_induction,
)
from ..model import ERROR, load_model, validate_model
from ..partition import ExposureBlock, SystemTotalsBlock, solve_decomposed
from ..solver import IntegrationSpec
from ..transient import parse_path, transient_chains
from .config import COMMANDS, DEFAULT_OUTPUT, RunConfig
from .discrete import SteadySnapshots
from .export import Table, time_table, write_csv, write_hdf5, write_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2
EXIT_IO = 3

DEFAULT_REFERENCE = 10.0
REPORT_ARCHIVE = 'report.h5'

tqdm_kwargs = {'file': sys.stderr, 'ascii': False, 'ncols': 80}


def _banner(config, message, color='cornflowerblue'):
    if not config.quiet:
        rich_print(message, color=color)


def _spec(config):
    return IntegrationSpec.uniform(
        config.t0,
        config.t1,
        config.samples,
        rtol=config.rtol,
        atol=config.atol,
        max_step=config.max_step,
        nonneg_clip=config.clip,
    )


def _parallel(config, function, items):
    """function(item) for every item on up to config.threads workers, concatenating
    the returned lists of tables in item order"""
    items = list(items)
    if config.threads == 1 or len(items) < 2:
        results = [function(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=min(config.threads, len(items))) as pool:
            results = list(pool.map(function, items))
    return [table for tables in results for table in tables]


def _system(config, model, variants=(), kinds=(COMPOSITE, SIMPLE), storages=None):
    """The solved trajectory (or snapshot sequence with --discrete) with running
    integrals of exposures and system totals, of the diact flows of `variants`, and
    with diact storages of the variants when `storages` is a list of pairs or 'all'"""
    if config.discrete is not None:
        return SteadySnapshots.from_table(config.discrete, model.names)
    n = model.n
    blocks = [ExposureBlock(n), SystemTotalsBlock()]
    if variants:
        # subsystem kinds have no flow-basis averages
        kinds_integrated = [k for k in kinds if k in (COMPOSITE, SIMPLE)]
        if kinds_integrated:
            blocks.append(DiactFlowIntegralBlock(n, variants, kinds_integrated))
    spec = _spec(config)
    if storages is None:
        return solve_decomposed(model, spec, blocks)
    pairs = None if storages == 'all' else storages
    return diact_storages(model, spec, variants, kinds, pairs, config.start, blocks)


def _add_vector(table, prefix, names, values):
    for i, name in enumerate(names):
        table.add(f'{prefix}_{name}', values[:, i])


def _add_matrix(table, prefix, rows, columns, values, skip_undefined=False):
    for i, receiver in enumerate(rows):
        for k, donor in enumerate(columns):
            column = values[:, i, k]
            if skip_undefined and np.all(np.isnan(column)):
                continue
            table.add(f'{prefix}_{receiver}_{donor}', column)


def _subsystem_names(model):
    return ['0', *model.names]


# Tables


def storage_tables(system, model):
    names = model.names
    storages = time_table('storages', system.grid)
    _add_vector(storages, 'x', names, system.x)
    _add_vector(storages, 'z', names, system.z)
    _add_vector(storages, 'y', names, system.w * system.x)
    substorages = time_table('substorages', system.grid)
    _add_matrix(substorages, 'x', names, _subsystem_names(model), system.X)
    return [storages, substorages]


def partition_tables(system, model):
    names = model.names
    S = system.subthroughflows
    flows = time_table('subthroughflows', system.grid)
    for direction, initial, matrix in (
        ('tau_in', S.tau0_in, S.T_in),
        ('tau_out', S.tau0_out, S.T_out),
    ):
        values = np.concatenate([initial[..., np.newaxis], matrix], axis=-1)
        _add_matrix(flows, direction, names, _subsystem_names(model), values)

    running = system.aux['exposure'].reshape(-1, model.n, model.n + 1)
    exposure = time_table('exposures', system.grid)
    _add_matrix(exposure, 'e', names, _subsystem_names(model), running)

    totals = time_table('system_totals', system.grid)
    totals.add('inward', system.tau_in.sum(axis=-1))
    totals.add('outward', system.tau_out.sum(axis=-1))
    totals.add('storage', system.x.sum(axis=-1))
    tables = storage_tables(system, model)
    return [*tables, flows, residence_table(system, model), exposure, totals]


def residence_table(system, model):
    residence = residence_times(system)
    table = time_table('residence', system.grid)
    _add_vector(table, 'R', model.names, residence.R)
    _add_vector(table, 'dR', model.names, residence.reverse_activity_rate)
    return table


def transient_tables(config, model, traces):
    names = model.names
    tables = []
    seen = set()
    for index, trace in enumerate(traces):
        name = f'transient_{trace.path.label}'
        if name in seen:
            name = f'{name}_{index}'
        seen.add(name)
        table = time_table(name, trace.grid)
        nodes = [names[i] for i in trace.path.nodes[1:]]
        for prefix, values in (
            ('inflow', trace.inflow),
            ('x_w', trace.storage),
            ('outflow', trace.outflow),
            ('throughflow', trace.throughflow),
            ('residence', trace.residence),
            ('e_w', trace.exposure),
        ):
            _add_vector(table, prefix, nodes, values)
        tables.append(table)
    if config.windows:
        tables.append(transient_window_table(config, model, traces, tables))
    return tables


def transient_window_table(config, model, traces, tables):
    table = Table('transient_exposure_windows')
    table.add('t_start', [start for start, _ in config.windows])
    table.add('t_end', [end for _, end in config.windows])
    for trace, series in zip(traces, tables):
        window = np.array(
            [transient_exposures(trace, start, end) for start, end in config.windows]
        )
        nodes = [model.names[i] for i in trace.path.nodes[1:]]
        _add_vector(table, f'{series.name}_e_w', nodes, window)
    return table


def diact_tables(config, model, system, field, kinds):
    names = model.names

    def tables_for(variant):
        tables = []
        for kind in kinds:
            label = f'{variant}_{kind_label(kind)}'
            flows = time_table(f'diact_{label}', system.grid)
            _add_matrix(flows, 'tau', names, names, field.flow(variant, kind))
            tables.append(flows)
            if field.has_storage(variant, kind):
                storages = time_table(f'diact_storage_{label}', system.grid)
                values = field.storage(variant, kind)
                integrals = field.storage_integral(variant, kind)
                _add_matrix(storages, 'x', names, names, values, skip_undefined=True)
                _add_matrix(storages, 'e', names, names, integrals, skip_undefined=True)
                tables.append(storages)
        return tables

    return _parallel(config, tables_for, config.variants)


def _subset(config):
    if not config.pairs:
        return None, None
    return [i for i, _ in config.pairs], [k for _, k in config.pairs]


def effect_tables(config, model, system, field, kinds, basis):
    names = model.names
    I, K = _subset(config)

    def tables_for(variant):
        tables = []
        for kind in kinds:
            report = effect_indices(field, system, variant, kind, basis, I, K)
            report = with_efficiency(report, system)
            effects = time_table(f'effects_{report.label}', system.grid)
            _add_matrix(effects, 'E', names, names, report.matrix)
            _add_matrix(effects, 'dE', names, names, report.efficiency)
            _add_vector(effects, 'receiver', names, report.receivers)
            _add_vector(effects, 'donor', names, report.donors)
            effects.add('total', report.total)
            total_rate = report.efficiency.sum(axis=(-2, -1))
            effects.add('stress' if report.is_stress else 'efficiency', total_rate)
            effects.add('subset', report.subset)

            utility = utility_indices(report, system)
            utilities = time_table(f'utilities_{report.label}', system.grid)
            _add_matrix(utilities, 'U', names, names, utility.matrix)
            _add_matrix(utilities, 'dU', names, names, utility.efficiency)
            _add_vector(utilities, 'receiver', names, utility.receivers)
            _add_vector(utilities, 'donor', names, utility.donors)
            utilities.add('total', utility.total)
            tables += [effects, utilities]
            if config.windows and (basis == STORAGE or kind in (COMPOSITE, SIMPLE)):
                args = (variant, kind, basis)
                tables.append(average_table(config, model, system, field, *args))
        return tables

    return _parallel(config, tables_for, config.variants)


def average_table(config, model, system, field, variant, kind, basis):
    names = model.names
    I, K = _subset(config)
    table = Table(f'averages_{variant}_{kind_label(kind)}_{basis}')
    averages = [
        average_indices(field, system, variant, start, end, kind, basis, I, K)
        for start, end in config.windows
    ]
    table.add('t_start', [a.t_start for a in averages])
    table.add('t_end', [a.t_end for a in averages])
    matrix = np.array([a.matrix for a in averages])
    _add_matrix(table, 'A', names, names, matrix)
    table.add('total', [a.total for a in averages])
    table.add('subset', [a.subset for a in averages])
    _add_matrix(table, 'U', names, names, np.array([a.utility for a in averages]))
    table.add('utility_total', [a.utility_total for a in averages])
    if basis == STORAGE:
        window = np.array(
            [
                diact_exposures(field, system, variant, start, end, kind)
                for start, end in config.windows
            ]
        )
        _add_matrix(table, 'e', names, names, window, skip_undefined=True)
    return table


def exposure_window_table(config, model, system):
    names = model.names
    reports = [exposures(system, start, end) for start, end in config.windows]
    table = Table('exposure_windows')
    table.add('t_start', [r.t_start for r in reports])
    table.add('t_end', [r.t_end for r in reports])
    _add_matrix(table, 'e', names, names, np.array([r.matrix for r in reports]))
    _add_vector(table, 'e0', names, np.array([r.initial for r in reports]))
    table.add('total', [r.total for r in reports])
    return table


def recovery_table(config, model, system):
    """Recovery after the largest input disturbance, or None when the default
    reference time is not a sample time"""
    reference = config.reference
    if reference is None:
        try:
            system.sample_index(DEFAULT_REFERENCE)
        except ValueError:
            logger.info("t=%r is not a sample time: no recovery", DEFAULT_REFERENCE)
            return None
        reference = DEFAULT_REFERENCE
    diagnostic = recovery_diagnostic(system, reference)
    table = Table('recovery')
    for label in ('reference', 'band', 'onset', 'disturbance', 'departure', 'recovery'):
        table.add(label, [getattr(diagnostic, label)])
    table.add('recovered', [diagnostic.recovered])
    table.add('interval', [diagnostic.interval])
    return table


def interaction_tables(config, model, system, field, pairs, basis):
    names = model.names
    thresholds = Thresholds(config.commensalism, config.competition)
    kind = resolve_induction(config.induction)

    def tables_for(pair):
        i, j = pair
        result = classify_pair(field, system, pair, thresholds, config.induction, basis)
        table = time_table(f'interactions_{names[i]}_{names[j]}', system.grid)
        table.add('verdict', np.array(result.labels(), dtype=object))
        table.add('strength', result.strength)
        donor = [names[k] if k >= 0 else '' for k in result.donor]
        table.add('shared_donor', np.array(donor, dtype=object))
        table.add('fired', np.array(['+'.join(f) for f in result.fired], dtype=object))
        for variant, sign in result.signs.items():
            table.add(f'sign_{variant}', sign.sign)
            table.add(f'strength_{variant}', sign.strength)
        if basis == FLOW:
            strengths = global_scale_strengths(field, system, pair, kind)
            table.add('mutualism_global', strengths.mutualism)
            table.add('exploitation_global_outward', strengths.exploitation_outward)
            table.add('exploitation_global_inward', strengths.exploitation_inward)
        return [(table, result)]

    results = _parallel(config, tables_for, pairs)
    summary = Table('interaction_summary')
    summary.add('i', np.array([names[r.pair[0]] for _, r in results], dtype=object))
    summary.add('j', np.array([names[r.pair[1]] for _, r in results], dtype=object))
    verdicts = [';'.join(r.verdicts()) for _, r in results]
    summary.add('verdicts', np.array(verdicts, dtype=object))
    return [table for table, _ in results] + [summary]


def _pairs(config, model):
    if config.pairs:
        return list(config.pairs)
    n = model.n
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


# Commands


def validate(config, model):
    warnings = [d for d in validate_model(model) if d.severity != ERROR]
    for diagnostic in warnings:
        _banner(config, str(diagnostic), color='orange')
    message = f"{config.model}: {model.n} compartment(s), {len(warnings)} warning(s)"
    _banner(config, message, color='green')
    return []


def simulate(config, model):
    system = solve_decomposed(model, _spec(config))
    return storage_tables(system, model)


def partition(config, model):
    system = _system(config, model)
    return partition_tables(system, model)


def transient(config, model):
    paths = [parse_path(text, model, config.start) for text in config.paths]
    _, traces = transient_chains(model, paths, _spec(config))
    return transient_tables(config, model, traces)


def diact(config, model):
    kinds = (COMPOSITE, SIMPLE, *config.subsystems)
    storages = None
    if config.storages:
        storages = list(config.pairs) if config.pairs else 'all'
    system = _system(config, model, config.variants, kinds, storages)
    field = diact_field(system, config.variants, kinds)
    return diact_tables(config, model, system, field, kinds)


def indices(config, model):
    kinds = (COMPOSITE, *config.subsystems)
    storages = 'all' if config.basis == STORAGE else None
    system = _system(config, model, config.variants, kinds, storages)
    field = diact_field(system, config.variants, kinds)
    tables = effect_tables(config, model, system, field, kinds, config.basis)
    tables.append(residence_table(system, model))
    if config.windows:
        tables.append(exposure_window_table(config, model, system))
    recovery = recovery_table(config, model, system)
    if recovery is not None:
        tables.append(recovery)
    return tables


def interactions(config, model):
    kind = INDUCTIONS[config.induction]
    storages = 'all' if config.basis == STORAGE else None
    system = _system(config, model, VARIANTS, (kind,), storages)
    field = diact_field(system, VARIANTS, (kind,))
    pairs = _pairs(config, model)
    return interaction_tables(config, model, system, field, pairs, config.basis)


def report(config, model):
    """Every stage on one shared solution"""
    kinds = (COMPOSITE, SIMPLE, 0)
    system = _system(config, model, VARIANTS, kinds, 'all' if config.storages else None)
    field = diact_field(system, VARIANTS, kinds)
    solved = (config, model, system, field)
    pairs = _pairs(config, model)
    stages = [
        ('partition', partial(partition_tables, system, model)),
        ('diact', partial(diact_tables, *solved, kinds)),
        ('indices', partial(effect_tables, *solved, [COMPOSITE], FLOW)),
        ('interactions', partial(interaction_tables, *solved, pairs, FLOW)),
    ]
    if config.storages:
        storage_indices = partial(effect_tables, *solved, [COMPOSITE], STORAGE)
        stages.append(('storage indices', storage_indices))
    if config.windows:
        windows = partial(exposure_window_table, config, model, system)
        stages.append(('exposures', lambda: [windows()]))
    stages.append(('recovery', lambda: [recovery_table(config, model, system)]))
    if config.paths:
        stages.append(('transient', partial(transient, config, model)))
    tables = []
    for name, stage in tqdm(
        stages, desc='report', unit='stage', disable=config.quiet, **tqdm_kwargs
    ):
        logger.info("report stage: %s", name)
        tables += [table for table in stage() if table is not None]
    return tables


HANDLERS = {
    'validate': validate,
    'simulate': simulate,
    'partition': partition,
    'transient': transient,
    'diact': diact,
    'indices': indices,
    'interactions': interactions,
    'report': report,
}
assert set(HANDLERS) == set(COMMANDS)


def run(config, model):
    """Run one command and write its tables. Returns the paths written."""
    _banner(config, f"ecoflux {config.command}: {config.model}")
    tables = HANDLERS[config.command](config, model)
    if not tables:
        return []
    output = Path(config.output)
    paths = [write_csv(table, output) for table in tables]
    if config.command == 'report':
        if config.hdf5:
            paths.append(write_hdf5(tables, output / REPORT_ARCHIVE))
        paths.append(write_manifest(output, paths, config.canonical(), __version__))
    _banner(config, f"wrote {len(paths)} file(s) to {output}", color='green')
    return paths


# Argument parsing


class ArgumentParser(argparse.ArgumentParser):
    """Exits with EXIT_INVALID on usage errors"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('model', help="model file")
    common.add_argument(
        '--output', default=None, help=f"output directory (default {DEFAULT_OUTPUT})"
    )
    common.add_argument('--threads', type=int, default=None, help="worker threads")
    common.add_argument(
        '-v', '--verbose', action='count', default=0, help="more logging (repeatable)"
    )
    common.add_argument('--quiet', action='store_true', help="no console banners")

    timing = argparse.ArgumentParser(add_help=False)
    timing.add_argument('--t0', type=float, default=None)
    timing.add_argument('--t1', type=float, default=None)
    timing.add_argument('--samples', type=int, default=None)
    timing.add_argument('--rtol', type=float, default=None)
    timing.add_argument('--atol', type=float, default=None)
    timing.add_argument('--max-step', dest='max_step', type=float, default=None)
    timing.add_argument(
        '--clip', action='store_true', help="zero small negative storages"
    )
    timing.add_argument(
        '--window',
        action='append',
        metavar='T1,T2',
        help="averaging window between two sample times (repeatable)",
    )

    discrete = argparse.ArgumentParser(add_help=False)
    discrete.add_argument(
        '--discrete',
        metavar='TABLE',
        default=None,
        help="snapshot CSV analysed as a sequence of steady states",
    )

    selection = argparse.ArgumentParser(add_help=False)
    selection.add_argument(
        '--pair', action='append', metavar='I,K', help="compartment pair (repeatable)"
    )
    selection.add_argument('--basis', choices=(FLOW, STORAGE), default=None)

    parser = ArgumentParser(
        prog='ecoflux',
        description="Flow, storage and interaction analysis of compartmental systems",
    )
    parser.add_argument('--version', action='version', version=f'ecoflux {__version__}')
    commands = parser.add_subparsers(dest='command', required=True)

    commands.add_parser('validate', parents=[common], help="check a model file")
    commands.add_parser(
        'simulate', parents=[common, timing], help="storages and substorages"
    )
    commands.add_parser(
        'partition',
        parents=[common, timing],
        help="subsystem partitioning: subthroughflows, residence times, exposures",
    )

    p = commands.add_parser(
        'transient', parents=[common, timing], help="transient flows along paths"
    )
    p.add_argument('--path', action='append', metavar='"k: i -> j"', required=True)
    p.add_argument('--start', type=float, default=None)

    p = commands.add_parser(
        'diact', parents=[common, timing, discrete], help="diact flows and storages"
    )
    p.add_argument('--variant', action='append', choices=VARIANTS)
    p.add_argument('--storages', action='store_true', help="track diact storages")
    p.add_argument('--start', type=float, default=None)
    p.add_argument('--subsystem', action='append', type=int, metavar='L')
    p.add_argument('--pair', action='append', metavar='I,K')

    p = commands.add_parser(
        'indices',
        parents=[common, timing, discrete, selection],
        help="effect and utility indices, exposures, recovery",
    )
    p.add_argument('--variant', action='append', choices=VARIANTS)
    p.add_argument('--subsystem', action='append', type=int, metavar='L')
    p.add_argument('--start', type=float, default=None)
    p.add_argument('--reference', type=float, default=None)

    p = commands.add_parser(
        'interactions',
        parents=[common, timing, discrete, selection],
        help="interaction types and strengths",
    )
    p.add_argument('--induction', choices=tuple(INDUCTIONS), default=None)
    p.add_argument('--commensalism', type=float, default=None)
    p.add_argument('--competition', type=float, default=None)
    p.add_argument('--start', type=float, default=None)

    p = commands.add_parser('report', parents=[common, timing], help="full pipeline")
    p.add_argument('--hdf5', action='store_true', help=f"also write {REPORT_ARCHIVE}")
    p.add_argument('--storages', action='store_true', help="track diact storages")
    p.add_argument('--path', action='append', metavar='"k: i -> j"')
    p.add_argument('--reference', type=float, default=None)
    p.add_argument('--pair', action='append', metavar='I,J')
    return parser


def _configure_logging(verbose):
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(
        level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr
    )


def _fail(message, code):
    print(f"ecoflux: error: {message}", file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help, --version and usage errors
        return e.code
    _configure_logging(args.verbose)
    try:
        model = load_model(args.model)
        config = RunConfig.from_args(args, model.simulate)
        run(config, model)
    except (SolverError, EvaluationError) as e:
        return _fail(e, EXIT_SOLVER)
    except OSError as e:
        return _fail(e, EXIT_IO)
    except (EcofluxError, ValueError) as e:
        return _fail(e, EXIT_INVALID)
    except KeyError as e:
        return _fail(e.args[0] if e.args else e, EXIT_INVALID)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
