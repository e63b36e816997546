# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

import argparse
import json
import sys

import numpy as np

from . import audit as aud
from . import dataset as ds
from . import fit
from . import gradsim as gs
from . import model as m
from . import planner as plan
from . import plotly_io as plots
from .utils import read_config, rich_print, to_json
from .version import __version__


# Compute of the 7B 32L x 4096W run
SEVEN_B_COMPUTE = 5.89e21
BASELINE_WIDTHS = [256, 512, 1024, 1536]


class ArchscaleParser(argparse.ArgumentParser):
    """Argument parser that exits with status 1 on usage errors"""
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f'{self.prog}: error: {message}\n')


def _split_list(text):
    """Comma or space separated list"""
    return [item for item in text.replace(',', ' ').split() if item != '']


def _int_list(text):
    try:
        return [int(item) for item in _split_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list: '{text}'")


def _float_list(text):
    try:
        return [float(item) for item in _split_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list: '{text}'")


def _model_spec(text):
    parts = text.split(':')
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"invalid model '{text}', expected NAME:DEPTH:WIDTH"
        )
    try:
        return parts[0], int(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid model '{text}', DEPTH and WIDTH must be integers"
        )


def _fixed_value(text):
    if '=' not in text:
        raise argparse.ArgumentTypeError(
            f"invalid --fix '{text}', expected NAME=VALUE"
        )
    name, value = text.split('=', 1)
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid --fix value in '{text}'")


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group('common options')
    group.add_argument(
        '--seed', type=int, default=42,
        help='Random seed of every stochastic step (default: 42)',
    )
    group.add_argument(
        '--kappa', type=float, default=None,
        help='Critical-depth constant kappa (default: 2.432)',
    )
    group.add_argument(
        '--dcrit-form', default=None, choices=['log', 'power', 'LogLaw', 'PowerLaw'],
        help='Critical-depth form (default: log)',
    )
    group.add_argument(
        '--config', default=None, metavar='FILE',
        help="Config file of 'key = value' defaults (flags take precedence)",
    )
    group.add_argument(
        '--format', default='text',
        choices=['text', 'rich', 'json', 'csv', 'svg', 'html'],
        help='Output format (default: text; not every command supports all)',
    )
    group.add_argument(
        '-o', '--output', default=None, metavar='PATH',
        help='Write the result to PATH instead of stdout',
    )
    return common


def _data_option(parser):
    parser.add_argument(
        '--data', default='bundled', metavar='PATH',
        help="Loss-records CSV file, or 'bundled' (default; honors ARCHSCALE_DATA)",
    )


def build_parser():
    """
    The archscale command-line parser.

    Usage
    -----
    archscale fit [--data PATH] [--group GROUPS] [--include-unknown] ...
    archscale predict --depth D --width W --tokens T [--explain]
    archscale dcrit --width W [--width W ...] [--tau]
    archscale audit [--builtin] [--roster CSV] [--model NAME:D:W] [--redesign]
    archscale plan (--budget C | --budgets C1,C2,...) [...]
    archscale simulate [--widths W1,W2,...] [--mode MODE] ...
    archscale verify [--data PATH]
    archscale report --kind {ucurve,tau,frontier,fit} [--format svg|html]
    """
    common = _common_options()
    parser = ArchscaleParser(
        prog='archscale',
        description='Architecture-conditioned scaling laws: fit, plan, audit',
    )
    parser.add_argument(
        '--version', action='version', version=f'archscale {__version__}',
    )
    subparsers = parser.add_subparsers(
        dest='command', metavar='command', parser_class=ArchscaleParser,
    )
    subparsers.required = True

    # fit
    sub = subparsers.add_parser(
        'fit', parents=[common], help='Fit the loss ansatz to loss records',
    )
    _data_option(sub)
    sub.add_argument(
        '--group', type=_split_list, default=['Baseline'], metavar='GROUPS',
        help="Scale groups to fit, or 'all' (default: Baseline)",
    )
    sub.add_argument(
        '--include-unknown', action='store_true',
        help='Fit unknown-token records with per-group loss offsets',
    )
    sub.add_argument(
        '--resamples', type=int, default=1000,
        help='Bootstrap resamples, 0 to skip intervals (default: 1000)',
    )
    sub.add_argument(
        '--starts', type=int, default=5,
        help='Number of multi-start initializations (default: 5)',
    )
    sub.add_argument(
        '--free', type=_split_list, default=None, metavar='NAMES',
        help='Free parameters (default: A,alpha,B,gamma,mu,kappa)',
    )
    sub.add_argument(
        '--fix', type=_fixed_value, action='append', default=[],
        metavar='NAME=VALUE',
        help='Hold a parameter fixed, e.g., --fix mu=0 (repeatable)',
    )
    sub.add_argument(
        '--ncpu', type=int, default=1,
        help='Processes for the bootstrap refits (default: 1)',
    )
    sub.add_argument(
        '--strict', action='store_true',
        help='Exit with status 2 if the point fit does not converge',
    )

    # predict
    sub = subparsers.add_parser(
        'predict', parents=[common], help='Predict the loss of a shape',
    )
    sub.add_argument('--depth', type=int, required=True, help='Number of layers')
    sub.add_argument('--width', type=int, required=True, help='Hidden dimension')
    sub.add_argument(
        '--tokens', type=float, default=None,
        help='Training tokens (count, e.g., 6.4e9)',
    )
    sub.add_argument(
        '--params', default=None, metavar='FILE',
        help='JSON parameters (a fit output), default: published values',
    )
    sub.add_argument(
        '--explain', action='store_true',
        help='Print the parameter-count breakdown',
    )

    # dcrit
    sub = subparsers.add_parser(
        'dcrit', parents=[common], help='Critical depth of widths',
    )
    sub.add_argument(
        '--width', type=int, action='append', required=True,
        help='Hidden dimension (repeatable)',
    )
    sub.add_argument(
        '--tau', action='store_true',
        help='Also report the power-law persistence length',
    )

    # audit
    sub = subparsers.add_parser(
        'audit', parents=[common], help='Score model shapes against D_crit',
    )
    sub.add_argument(
        '--builtin', action='store_true',
        help='Audit the built-in roster (default without --roster/--model)',
    )
    sub.add_argument(
        '--roster', default=None, metavar='CSV',
        help='Roster CSV file with columns name,depth,width',
    )
    sub.add_argument(
        '--model', type=_model_spec, action='append', default=[],
        metavar='NAME:D:W', help='Add a model to the roster (repeatable)',
    )
    sub.add_argument(
        '--redesign', action='store_true',
        help='Add the widest-at-D_crit shape with the same parameter count',
    )
    sub.add_argument(
        '--kappas', type=_float_list, default=None, metavar='K1,K2,...',
        help='Report verdicts over a range of kappa values',
    )

    # plan
    sub = subparsers.add_parser(
        'plan', parents=[common], help='Compute-optimal depth and width',
    )
    sub.add_argument(
        '--budget', type=float, default=None, help='Compute budget in FLOPs',
    )
    sub.add_argument(
        '--budgets', type=_float_list, default=None, metavar='C1,C2,...',
        help='Budgets for the optimal-shape exponent regression',
    )
    sub.add_argument(
        '--depth-range', type=int, nargs=2, default=[1, 256],
        metavar=('MIN', 'MAX'), help='Depth search range (default: 1 256)',
    )
    sub.add_argument(
        '--width-range', type=int, nargs=2, default=[256, 32768],
        metavar=('MIN', 'MAX'), help='Width search range (default: 256 32768)',
    )
    sub.add_argument(
        '--width-step', type=int, default=64,
        help='Width granularity (default: 64)',
    )
    sub.add_argument(
        '--prefer', default='shallow', choices=['shallow', 'deep'],
        help='Representative of tied optima (default: shallow)',
    )
    sub.add_argument(
        '--tie-rtol', type=float, default=0.0,
        help='Relative loss tolerance of ties (default: 0)',
    )
    sub.add_argument(
        '--frontier', default=None, metavar='CSV',
        help='Write the per-depth frontier to a CSV file',
    )
    sub.add_argument(
        '--params', default=None, metavar='FILE',
        help='JSON parameters (a fit output), default: published values',
    )

    # simulate
    sub = subparsers.add_parser(
        'simulate', parents=[common], help='Simulate gradient persistence',
    )
    sub.add_argument(
        '--widths', type=_int_list, default=list(BASELINE_WIDTHS),
        metavar='W1,W2,...', help='Widths (default: 256,512,1024,1536)',
    )
    sub.add_argument(
        '--mode', default='MatrixProduct',
        choices=['MatrixProduct', 'NormRecursion'],
        help='Simulation mode (default: MatrixProduct)',
    )
    sub.add_argument(
        '--sigma', type=float, default=1.0,
        help='Block perturbation scale (default: 1.0)',
    )
    sub.add_argument(
        '--trials', type=int, default=64,
        help='Monte Carlo trials (default: 64)',
    )
    sub.add_argument(
        '--depth', type=int, default=None,
        help='Number of blocks (default: 3*D_crit(W))',
    )
    sub.add_argument(
        '--metric', default='signal', choices=list(gs.METRICS),
        help='Trial aggregation (default: signal)',
    )
    sub.add_argument(
        '--dense', action='store_true',
        help='Draw full W x W Jacobians',
    )

    # verify
    sub = subparsers.add_parser(
        'verify', parents=[common],
        help='Check the published orderings on a dataset',
    )
    _data_option(sub)

    # report
    sub = subparsers.add_parser(
        'report', parents=[common], help='Write a figure (svg or html)',
    )
    sub.add_argument(
        '--kind', required=True, choices=['ucurve', 'tau', 'frontier', 'fit'],
        help='Figure to make',
    )
    _data_option(sub)
    sub.add_argument(
        '--width', type=int, default=512,
        help='Width of the depth sweep (ucurve, default: 512)',
    )
    sub.add_argument(
        '--group', default='Baseline',
        help='Scale group of the depth sweep (ucurve, default: Baseline)',
    )
    sub.add_argument(
        '--budget', type=float, default=SEVEN_B_COMPUTE,
        help='Compute budget of the frontier (default: 5.89e21)',
    )
    sub.add_argument(
        '--widths', type=_int_list, default=list(BASELINE_WIDTHS),
        metavar='W1,W2,...', help='Widths of the tau sweep',
    )
    sub.add_argument(
        '--sigma', type=float, default=1.0,
        help='Perturbation scale of the tau sweep (default: 1.0)',
    )
    sub.add_argument(
        '--trials', type=int, default=64,
        help='Trials of the tau sweep (default: 64)',
    )
    return parser


def _convert(action, value):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        flag = value.strip().lower() in ('1', 'true', 'yes', 'on')
        return flag if isinstance(action, argparse._StoreTrueAction) else not flag
    converter = action.type if action.type is not None else str
    is_list = (
        action.nargs not in (None, '?')
        or isinstance(action, argparse._AppendAction)
    )
    try:
        if is_list:
            return [converter(item) for item in _split_list(value)]
        return converter(value)
    except argparse.ArgumentTypeError as error:
        raise ValueError(f"Invalid config value for '{action.dest}': {error}")


def apply_config(parser, config_file):
    """
    Use a config file's 'key = value' entries as subcommand defaults,
    so that explicit flags take precedence.
    """
    config = read_config(config_file)
    subparsers = [
        action for action in parser._actions
        if isinstance(action, argparse._SubParsersAction)
    ][0]
    used = set()
    for sub in subparsers.choices.values():
        defaults = {}
        for action in sub._actions:
            if action.dest in config and action.dest not in ('config', 'help'):
                defaults[action.dest] = _convert(action, config[action.dest])
                used.add(action.dest)
        sub.set_defaults(**defaults)
    unknown = sorted(set(config) - used)
    if unknown:
        raise ValueError(f"Unknown keys in config file '{config_file}': {unknown}")


def _params(args):
    """Published or file-loaded parameters with --kappa/--dcrit-form applied"""
    params = m.PUBLISHED_PARAMS
    if getattr(args, 'params', None) is not None:
        with open(args.params, 'r') as f:
            values = json.load(f)
        values = values.get('params', values)
        params = m.ScalingLawParams.from_dict(values)
    changes = {}
    if args.kappa is not None:
        changes['kappa'] = args.kappa
    if args.dcrit_form is not None:
        changes['dcrit_form'] = m.normalize_form(args.dcrit_form)
    return params.replace(**changes)


def _load_data(path):
    if path == 'bundled':
        return ds.load_bundled()
    return ds.load_csv(path)


def _check_format(args, formats):
    if args.format not in formats:
        raise ValueError(
            f"The {args.command} command does not support --format "
            f"{args.format} (use one of: {', '.join(formats)})"
        )


def _emit(args, text):
    """Write a result to --output or stdout"""
    if args.output is not None:
        with open(args.output, 'w') as f:
            f.write(text if text.endswith('\n') else text + '\n')
        return
    if args.format == 'rich':
        rich_print(text, format='rich', file=sys.stdout)
    else:
        print(text)


def run_fit(args):
    _check_format(args, ['text', 'rich', 'json'])
    data = _load_data(args.data)
    groups = args.group
    if any(group.lower() == 'all' for group in groups):
        groups = None
    records = data.select(groups)
    fixed = dict(args.fix)
    if args.kappa is not None and 'kappa' not in fixed:
        fixed['kappa'] = args.kappa
    free = args.free
    if free is not None:
        free = [name for name in free if name not in fixed]
    form = 'LogLaw' if args.dcrit_form is None else args.dcrit_form
    config = fit.FitConfig(
        bootstrap_resamples=args.resamples,
        rng_seed=args.seed,
        free_params=free,
        fixed_params=fixed,
        dcrit_form=form,
        n_starts=args.starts,
        include_unknown_tokens=args.include_unknown,
        ncpu=args.ncpu,
    )
    result = fit.fit_scaling_law(
        records, config, bootstrap=args.resamples > 0, strict=args.strict,
    )
    if args.format == 'json':
        _emit(args, to_json(result.to_dict()))
    else:
        _emit(args, result.text(format='rich' if args.format == 'rich' else None))
    return 0


def run_predict(args):
    _check_format(args, ['text', 'json'])
    params = _params(args)
    arch = m.Architecture(args.depth, args.width)
    if args.tokens is None:
        raise ValueError(
            'predict needs --tokens: the data term is undefined for an '
            'unknown token count'
        )
    terms = m.loss_terms(arch.depth, arch.width, args.tokens, params)
    dcrit = m.d_crit(arch.width, params)
    report = {
        'depth': arch.depth,
        'width': arch.width,
        'tokens': args.tokens,
        'n_params': int(terms['n_params']),
        'compute': m.compute_flops(arch, args.tokens),
        'capacity_term': float(terms['capacity']),
        'data_term': float(terms['data']),
        'penalty_term': float(terms['penalty']),
        'loss': float(terms['loss']),
        'd_crit': dcrit,
        'd_over_dcrit': arch.depth / dcrit,
    }
    if args.explain:
        report['param_breakdown'] = arch.explain()
    if args.format == 'json':
        _emit(args, to_json(report))
        return 0
    lines = [
        f'{arch}: N = {report["n_params"]:,d}, T = {args.tokens:.4g}, '
        f'C = {report["compute"]:.4g} FLOPs',
        f'loss = {report["loss"]:.4f} nats '
        f'(capacity {report["capacity_term"]:.4f} + data '
        f'{report["data_term"]:.4f} + penalty {report["penalty_term"]:.4f})',
        f'D/D_crit = {arch.depth}/{dcrit:.1f} = {report["d_over_dcrit"]:.2f}',
    ]
    if args.explain:
        lines += ['', m.explain_params(arch)]
    _emit(args, '\n'.join(lines))
    return 0


def run_dcrit(args):
    _check_format(args, ['text', 'json', 'csv'])
    params = _params(args)
    rows = []
    for width in args.width:
        row = {'width': width, 'd_crit': m.d_crit(width, params)}
        if args.tau:
            discrepancy = m.dcrit_discrepancy(width, params)
            row['tau_power'] = discrepancy['tau_power']
            row['ratio'] = discrepancy['ratio']
        rows.append(row)

    if args.format == 'json':
        _emit(args, to_json(rows))
    elif args.format == 'csv':
        names = list(rows[0])
        lines = [','.join(names)]
        lines += [','.join(f'{row[name]:.6g}' for name in names) for row in rows]
        _emit(args, '\n'.join(lines))
    elif len(rows) == 1 and not args.tau:
        _emit(args, f"{rows[0]['d_crit']:.1f}")
    else:
        lines = []
        for row in rows:
            line = f"W = {row['width']}: D_crit = {row['d_crit']:.1f}"
            if args.tau:
                line += (
                    f", tau(power law) = {row['tau_power']:.1f} "
                    f"(ratio {row['ratio']:.2f})"
                )
            lines.append(line)
        _emit(args, '\n'.join(lines))
    return 0


def run_audit(args):
    _check_format(args, ['text', 'rich', 'json'])
    params = _params(args)
    entries = []
    if args.builtin or (args.roster is None and len(args.model) == 0):
        entries += aud.builtin_entries(params)
    if args.roster is not None:
        for name, depth, width in aud.load_roster(args.roster):
            entries.append(aud.audit_model(name, depth, width, params))
    for name, depth, width in args.model:
        entries.append(aud.audit_model(name, depth, width, params))

    rich = 'rich' if args.format == 'rich' else None
    text, report = aud.audit_report(entries, params, format=rich)
    if args.redesign:
        report['redesign'] = [
            aud.redesign_shape(entry.depth, entry.width, params, name=entry.name)
            for entry in entries
            if entry.ratio >= 1.0
        ]
        lines = ['', 'Redesign at about the same parameter count:']
        for redesign in report['redesign']:
            old = redesign['original']
            new = redesign['redesign']
            line = (
                f"{redesign['name']}: {old['depth']}L x {old['width']}W -> "
                f"{new['depth']}L x {new['width']}W "
                f"(D/D_crit {old['ratio']:.2f} -> {new['ratio']:.2f}, "
                f"params {100*redesign['param_change']:+.1f}%)"
            )
            if redesign['published'] is not None:
                published = redesign['published']
                line += (
                    f"; published: {published['depth']}L x "
                    f"~{published['width']}W"
                )
            lines.append(line)
        text += '\n' + '\n'.join(lines)
    if args.kappas is not None:
        report['kappa_sensitivity'] = {
            entry.name: aud.kappa_sensitivity(entry, args.kappas, params)
            for entry in entries
        }
        lines = ['', 'Verdicts over kappa = ' + ', '.join(f'{k:g}' for k in args.kappas)]
        for name, rows in report['kappa_sensitivity'].items():
            verdicts = ', '.join(row['verdict'] for row in rows)
            lines.append(f'{name}: {verdicts}')
        text += '\n' + '\n'.join(lines)

    if args.format == 'json':
        _emit(args, to_json(report))
    else:
        _emit(args, text)
    return 0


def run_plan(args):
    _check_format(args, ['text', 'json', 'csv'])
    if args.budget is None and args.budgets is None:
        raise ValueError('Specify a compute budget with --budget or --budgets')
    params = _params(args)
    budget = args.budget if args.budget is not None else args.budgets[0]
    query = plan.PlanQuery(
        budget,
        params=params,
        depth_range=args.depth_range,
        width_range=args.width_range,
        width_step=args.width_step,
        prefer=args.prefer,
        tie_rtol=args.tie_rtol,
    )

    if args.budgets is not None:
        exponents = plan.fit_scaling_exponents(args.budgets, query=query)
        if args.format == 'json':
            _emit(args, to_json(exponents))
            return 0
        if args.format == 'csv':
            names = ['compute', 'depth', 'width', 'n_params', 'tokens',
                     'predicted_loss', 'd_over_dcrit']
            lines = [','.join(names)]
            for optimum in exponents['optima']:
                lines.append(','.join(repr(optimum[name]) for name in names))
            _emit(args, '\n'.join(lines))
            return 0
        published = exponents['published']
        ratio = exponents['ratio']
        lines = [
            'Optimal shape against compute:',
            f"  D* ~ C^{exponents['d_exp']:.3f} (R^2 = "
            f"{exponents['d_r_squared']:.3f}), published "
            f"C^{published['d_exp']}",
            f"  W* ~ C^{exponents['w_exp']:.3f} (R^2 = "
            f"{exponents['w_r_squared']:.3f}), published "
            f"C^{published['w_exp']}",
            f"  ratio = {'undefined' if ratio is None else f'{ratio:.2f}'}, "
            f"published {published['ratio']}",
        ]
        closed = exponents['closed_form']
        if closed is not None:
            lines.append(
                f"Printed closed form at alpha = {closed['alpha']:g}, "
                f"delta = {closed['delta']:g}: D* ~ C^{closed['d_exp']:.3f}, "
                f"W* ~ C^{closed['w_exp']:.3f} "
                f"({'consistent' if closed['consistent'] else 'inconsistent'} "
                'with the published exponents)'
            )
        if exponents['n_on_edge'] > 0:
            lines.append(
                f"{exponents['n_on_edge']} of {len(exponents['optima'])} "
                'optima lie on the search-grid boundary'
            )
        _emit(args, '\n'.join(lines))
        return 0

    result = plan.optimize_shape(query)
    if args.frontier is not None:
        result.write_frontier_csv(args.frontier)
    if args.format == 'json':
        _emit(args, to_json(result.to_dict()))
    elif args.format == 'csv':
        table = result.frontier_table()
        lines = [','.join(table.colnames)]
        for row in table:
            lines.append(','.join(repr(row[name].item()) for name in table.colnames))
        _emit(args, '\n'.join(lines))
    else:
        _emit(args, result.text())
    return 0


def run_simulate(args):
    _check_format(args, ['text', 'json', 'csv'])
    template = gs.SimConfig(
        width=args.widths[0],
        depth=args.depth,
        params=_params(args),
        sigma=args.sigma,
        trials=args.trials,
        rng_seed=args.seed,
        mode=args.mode,
        metric=args.metric,
        dense=args.dense,
    )
    if len(set(args.widths)) >= 3:
        curve, profiles = gs.sweep_tau(args.widths, template, return_profiles=True)
    else:
        profiles = [
            gs.simulate(template.replace(width=width)) for width in args.widths
        ]
        curve = [(profile.width, profile.tau_hat) for profile in profiles]

    fits = None
    finite = all(np.isfinite(tau) and tau > 0 for _, tau in curve)
    if len(set(args.widths)) >= 3 and finite:
        fits = fit.fit_tau_models(curve)

    if args.format == 'csv':
        table = gs.profiles_table(profiles)
        lines = [','.join(table.colnames)]
        for row in table:
            lines.append(
                f"{row['width']},{row['depth']},{row['layer']},"
                f"{float(row['ratio'])!r}"
            )
        _emit(args, '\n'.join(lines))
        return 0
    if args.format == 'json':
        report = {
            'profiles': [profile.to_dict() for profile in profiles],
            'curve': curve,
            'fits': fits,
        }
        _emit(args, to_json(report))
        return 0

    lines = [f'{args.mode} gradient persistence (sigma = {args.sigma}):']
    for profile in profiles:
        lines.append(
            f'  W = {profile.width:5d}, D = {profile.depth:3d}: '
            f'tau_hat = {profile.tau_hat:.4g}'
        )
    if fits is not None:
        c, a, r2 = fits['power']
        c_log, r2_log = fits['log']
        lines.append(f'Power law: tau = {c:.4g}*W^{a:.3f} (R^2 = {r2:.4f})')
        lines.append(f'Log law:   tau = {c_log:.4g}*ln(W) (R^2 = {r2_log:.4f})')
    _emit(args, '\n'.join(lines))
    return 0


def run_verify(args):
    _check_format(args, ['text', 'rich', 'json'])
    report = ds.verify_published_results(_load_data(args.data))
    if args.format == 'json':
        _emit(args, to_json(report.to_dict()))
    else:
        rich = 'rich' if args.format == 'rich' else None
        _emit(args, report.text(format=rich))
    return 0 if report.passed else 1


def run_report(args):
    if args.format == 'text':
        args.format = 'svg'
    _check_format(args, ['svg', 'html'])
    params = _params(args)

    if args.kind == 'ucurve':
        data = _load_data(args.data)
        series, dcrit = plots.depth_sweep_series(
            data, args.width, m.normalize_group(args.group), params,
        )
        svg_kwargs = dict(
            title=f'Loss against depth at W = {args.width}',
            xlabel='depth (layers)', ylabel='loss (nats)',
            vline=(dcrit, f'D_crit = {dcrit:.1f}'),
        )
        kind = 'ucurve'
        figure = lambda: plots.plotly_depth_sweep(
            data, args.width, m.normalize_group(args.group), params,
        )
    elif args.kind == 'tau':
        template = gs.SimConfig(
            width=args.widths[0], sigma=args.sigma, trials=args.trials,
            rng_seed=args.seed, params=params,
        )
        curve = gs.sweep_tau(args.widths, template)
        fits = fit.fit_tau_models(curve)
        series = plots.tau_curve_series(curve, fits)
        svg_kwargs = dict(
            title='Persistence length against width',
            xlabel='width', ylabel='tau', log_x=True, log_y=True,
        )
        kind = 'scatter'
        figure = lambda: plots.plotly_tau_curve(curve, fits)
    elif args.kind == 'frontier':
        result = plan.optimize_shape(plan.PlanQuery(args.budget, params=params))
        series = plots.frontier_series(result)
        dcrit = result.best.depth / result.d_over_dcrit
        svg_kwargs = dict(
            title=f'Best loss per depth at C = {args.budget:.3g} FLOPs',
            xlabel='depth (layers)', ylabel='predicted loss (nats)',
            vline=(dcrit, 'D_crit(W*)'), mark_minimum=True,
        )
        kind = 'line'
        figure = lambda: plots.plotly_frontier(result)
    else:
        data = _load_data(args.data).select('Baseline')
        config = fit.FitConfig(rng_seed=args.seed)
        result = fit.fit_scaling_law(data, config, bootstrap=False)
        lo = float(np.amin([result.observed, result.predicted]))
        hi = float(np.amax([result.observed, result.predicted]))
        series = [
            {'x': result.predicted, 'y': result.observed,
             'label': 'records', 'mode': 'markers'},
            {'x': [lo, hi], 'y': [lo, hi], 'label': 'y = x', 'mode': 'lines'},
        ]
        svg_kwargs = dict(
            title=f'R2 = {result.r_squared:.3f}, RMSE = {result.rmse:.3f} nats',
            xlabel='predicted loss (nats)', ylabel='observed loss (nats)',
        )
        kind = 'scatter'
        figure = lambda: plots.plotly_fit(result)

    if args.format == 'svg':
        if args.output is None:
            sys.stdout.write(plots.render_svg(series, kind, **svg_kwargs))
        else:
            plots.emit_plot(series, kind, args.output, **svg_kwargs)
    else:
        output = sys.stdout if args.output is None else args.output
        plots.write_html(figure(), output)
    return 0


COMMANDS = {
    'fit': run_fit,
    'predict': run_predict,
    'dcrit': run_dcrit,
    'audit': run_audit,
    'plan': run_plan,
    'simulate': run_simulate,
    'verify': run_verify,
    'report': run_report,
}


def main(argv=None):
    """
    Run the archscale command line.

    Returns
    -------
    status: Integer
        0 on success, 1 on invalid input (or failed verification),
        2 on numerical non-convergence.
    """
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        pre_parser = argparse.ArgumentParser(add_help=False)
        pre_parser.add_argument('--config', default=None)
        pre, _ = pre_parser.parse_known_args(argv)
        if pre.config is not None:
            apply_config(parser, pre.config)
        args = parser.parse_args(argv)
    except SystemExit as status:
        return 0 if status.code is None else int(status.code)
    except (ValueError, OSError) as error:
        print(f'archscale: error: {error}', file=sys.stderr)
        return 1

    try:
        return COMMANDS[args.command](args)
    except fit.ConvergenceError as error:
        print(f'archscale: convergence error: {error}', file=sys.stderr)
        return 2
    except (ValueError, OSError) as error:
        print(f'archscale: error: {error}', file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
