# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'VERDICTS',
    'BUILTIN_ROSTER',
    'EXTRAPOLATION_CAVEAT',
    'AuditEntry',
    'verdict_for_ratio',
    'dcrit_law',
    'audit_model',
    'builtin_entries',
    'load_roster',
    'audit_report',
    'kappa_sensitivity',
    'redesign_shape',
]

import numpy as np
from astropy.io import ascii

from ..model import (
    PUBLISHED_PARAMS,
    Architecture,
    count_params,
    d_crit,
    normalize_form,
)
from ..utils import format_text


VERDICTS = (
    'UnderCritical',
    'NearOptimal',
    'OverDeep',
    'Delusive',
)

# Name, depth, width, printed D_crit, printed verdict
BUILTIN_ROSTER = [
    {
        'name': 'GPT-3',
        'depth': 96,
        'width': 12288,
        'published_d_crit': 22.9,
        'published_verdict': 'Delusive',
        'note': 'D_crit also printed as 22.6 (ratio 4.25) and ~23',
    },
    {
        'name': 'PaLM',
        'depth': 118,
        'width': 18432,
        'published_d_crit': 23.9,
        'published_verdict': 'Delusive',
        'note': 'D_crit also printed as 23.6 (ratio 5.0)',
    },
    {
        'name': 'Llama-2-70B',
        'depth': 80,
        'width': 8192,
        'published_d_crit': 21.6,
        'published_verdict': 'Delusive',
        'note': 'ratio printed as 3.6-3.7',
    },
    {
        'name': 'Llama-3-70B',
        'depth': 80,
        'width': 8192,
        'published_d_crit': 21.9,
        'published_verdict': 'Delusive',
        'note': '',
    },
    {
        'name': 'Mistral-7B',
        'depth': 32,
        'width': 4096,
        'published_d_crit': 20.0,
        'published_verdict': 'NearOptimal',
        'note': 'ratio printed as 1.6',
    },
]

# Published redesign of GPT-3 at about the same parameter count
PUBLISHED_REDESIGN = {
    'GPT-3': (24, 28000),
}

EXTRAPOLATION_CAVEAT = (
    'Caveat: critical depths are calibrated on models up to 7B '
    'parameters; verdicts for larger models are extrapolations pending '
    'validation, and kappa may shift at these scales.'
)


def dcrit_law(params=None, form=None):
    """
    Critical-depth formula of a form with its constants filled in.

    Examples
    --------
    >>> import archscale.audit as audit
    >>> print(audit.dcrit_law(form='PowerLaw'))
    tau_c*W**tau_a with tau_c = 2.06, tau_a = 0.44
    """
    if params is None:
        params = PUBLISHED_PARAMS
    form = params.dcrit_form if form is None else normalize_form(form)
    if form == 'LogLaw':
        return f'kappa*ln(W) with kappa = {params.kappa:g}'
    return (
        f'tau_c*W**tau_a with tau_c = {params.tau_c:g}, '
        f'tau_a = {params.tau_a:g}'
    )


def verdict_for_ratio(ratio):
    """
    Verdict band of a D/D_crit ratio: [0, 1) UnderCritical,
    [1, 2) NearOptimal, [2, 3) OverDeep, [3, inf) Delusive.

    Examples
    --------
    >>> import archscale.audit as audit
    >>> print([audit.verdict_for_ratio(r) for r in [0.99, 1.0, 2.0, 3.0]])
    ['UnderCritical', 'NearOptimal', 'OverDeep', 'Delusive']
    """
    if not np.isfinite(ratio) or ratio < 0:
        raise ValueError(f'Invalid depth ratio: {ratio}')
    if ratio < 1.0:
        return 'UnderCritical'
    if ratio < 2.0:
        return 'NearOptimal'
    if ratio < 3.0:
        return 'OverDeep'
    return 'Delusive'


class AuditEntry():
    """
    Critical-depth audit of one model shape.

    Attributes
    ----------
    name: String
    depth, width: Integer
    d_crit: Float
    ratio: Float
        depth / d_crit.
    verdict: String
        One of VERDICTS.
    kappa: Float
        Critical-depth constant used.
    form: String
        Critical-depth form used, 'LogLaw' or 'PowerLaw'.
    law: String
        The critical-depth formula with its constants, for reports.
    published_d_crit, published_verdict, note:
        Annotations of the built-in roster (None otherwise).
    """
    def __init__(
        self, name, depth, width, d_crit, ratio, verdict, kappa,
        published_d_crit=None, published_verdict=None, note=None,
        form='LogLaw', law=None,
    ):
        self.name = name
        self.depth = depth
        self.width = width
        self.d_crit = d_crit
        self.ratio = ratio
        self.verdict = verdict
        self.kappa = kappa
        self.published_d_crit = published_d_crit
        self.published_verdict = published_verdict
        self.note = note
        self.form = form
        self.law = law

    def as_dict(self):
        return {
            'name': self.name,
            'depth': self.depth,
            'width': self.width,
            'd_crit': self.d_crit,
            'ratio': self.ratio,
            'verdict': self.verdict,
            'kappa': self.kappa,
            'form': self.form,
            'published_d_crit': self.published_d_crit,
            'published_verdict': self.published_verdict,
            'note': self.note,
        }

    def __str__(self):
        return (
            f'{self.name}: {self.depth}L x {self.width}W, '
            f'D_crit = {self.d_crit:.1f}, D/D_crit = {self.ratio:.2f} '
            f'({self.verdict})'
        )


def audit_model(name, depth, width, params=None, kappa=None, form=None):
    """
    Score a model shape against its critical depth.

    Parameters
    ----------
    name: String
    depth: Integer
        Number of layers (>= 1).
    width: Integer
        Hidden dimension (>= 2).
    params: ScalingLawParams
        Defaults to PUBLISHED_PARAMS.
    kappa: Float
        Override of params.kappa, for sensitivity runs.
    form: String
        Critical-depth form, defaults to params.dcrit_form.

    Returns
    -------
    entry: AuditEntry

    Examples
    --------
    >>> import archscale.audit as audit
    >>> entry = audit.audit_model('GPT-3', 96, 12288)
    >>> print(entry)
    GPT-3: 96L x 12288W, D_crit = 22.9, D/D_crit = 4.19 (Delusive)
    """
    arch = Architecture(depth, width)
    if arch.width < 2:
        raise ValueError(f'width must be >= 2, got {width}')
    if params is None:
        params = PUBLISHED_PARAMS
    if kappa is not None:
        params = params.replace(kappa=float(kappa))
    form = params.dcrit_form if form is None else normalize_form(form)
    dcrit = d_crit(arch.width, params, form=form)
    ratio = arch.depth / dcrit
    return AuditEntry(
        str(name), arch.depth, arch.width, dcrit, ratio,
        verdict_for_ratio(ratio), params.kappa,
        form=form, law=dcrit_law(params, form),
    )


def builtin_entries(params=None, kappa=None):
    """Audit entries of the built-in roster, with published annotations"""
    entries = []
    for model in BUILTIN_ROSTER:
        entry = audit_model(
            model['name'], model['depth'], model['width'], params, kappa,
        )
        entry.published_d_crit = model['published_d_crit']
        entry.published_verdict = model['published_verdict']
        entry.note = model['note']
        entries.append(entry)
    return entries


def load_roster(path):
    """
    Read a roster CSV file with columns name, depth, width.

    Returns
    -------
    roster: List of (name, depth, width) tuples
    """
    with open(path, 'r') as f:
        lines = [line for line in f.read().splitlines() if line.strip() != '']
    if len(lines) == 0:
        return []
    header = [name.strip() for name in lines[0].split(',')]
    if header != ['name', 'depth', 'width']:
        raise ValueError(
            f"Invalid roster header in '{path}': expected 'name,depth,width', "
            f"got '{lines[0].strip()}'"
        )
    if len(lines) == 1:
        return []
    table = ascii.read(
        lines, format='csv', guess=False, fast_reader=False,
        converters={name: [ascii.convert_numpy(str)] for name in header},
    )
    roster = []
    for i, row in enumerate(table):
        name = str(row['name']).strip()
        try:
            depth = int(str(row['depth']).strip())
            width = int(str(row['width']).strip())
        except ValueError:
            raise ValueError(
                f"Invalid roster row {i+1} (line {i+2}) in '{path}': depth "
                f"and width must be integers, got '{row['depth']}', "
                f"'{row['width']}'"
            )
        if name == '' or np.ma.is_masked(row['name']):
            raise ValueError(
                f"Invalid roster row {i+1} (line {i+2}) in '{path}': empty name"
            )
        roster.append((name, depth, width))
    return roster


def _as_entries(entries, params, kappa):
    audited = []
    for entry in entries:
        if isinstance(entry, AuditEntry):
            audited.append(entry)
        else:
            name, depth, width = entry
            audited.append(audit_model(name, depth, width, params, kappa))
    return audited


def audit_report(entries=None, params=None, kappa=None, format=None):
    """
    Audit a roster and format the result.

    Parameters
    ----------
    entries: Iterable of AuditEntry or (name, depth, width) tuples
        Defaults to the built-in roster.
    params: ScalingLawParams
        Defaults to PUBLISHED_PARAMS.
    kappa: Float
        Override of the critical-depth constant.
    format: String
        Text markup: None (plain), 'html', or 'rich'.  Delusive
        verdicts are highlighted as danger and OverDeep as warning.

    Returns
    -------
    text: String
        Aligned table sorted by D/D_crit (descending), plus the
        extrapolation caveat.
    report: Dictionary
        JSON-ready report with the same entries.

    Examples
    --------
    >>> import archscale.audit as audit
    >>> text, report = audit.audit_report()
    >>> print(text)
    """
    if entries is None:
        entries = builtin_entries(params, kappa)
    else:
        entries = _as_entries(entries, params, kappa)
    if len(entries) == 0:
        raise ValueError('The audit roster is empty')
    names = [entry.name for entry in entries]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise ValueError(f'Duplicate model names in roster: {duplicates}')

    entries = sorted(entries, key=lambda entry: -entry.ratio)
    annotated = any(entry.published_d_crit is not None for entry in entries)
    width = max(len('Model'), *[len(name) for name in names])
    header = (
        f"{'Model':{width}s}  Depth  Width   D_crit  D/D_crit  Verdict"
    )
    if annotated:
        header += '        Published'
    lines = [header, '-'*len(header)]
    for entry in entries:
        line = (
            f'{entry.name:{width}s}  {entry.depth:5d}  {entry.width:5d}  '
            f'{entry.d_crit:7.2f}  {entry.ratio:8.2f}  {entry.verdict:13s}'
        )
        if entry.published_d_crit is not None:
            line += (
                f'  {entry.published_d_crit:.1f} ({entry.published_verdict})'
            )
        lines.append(format_text(
            line,
            danger=entry.verdict=='Delusive',
            warning=entry.verdict=='OverDeep',
            format=format,
        ))
    lines.append('')
    laws = []
    for entry in sorted(entries, key=lambda entry: (entry.form, entry.kappa)):
        law = entry.law
        if law is None:
            params_k = PUBLISHED_PARAMS.replace(kappa=entry.kappa)
            law = dcrit_law(params_k, entry.form)
        if law not in laws:
            laws.append(law)
    lines.append('D_crit = ' + '; '.join(laws))
    lines.append(EXTRAPOLATION_CAVEAT)

    report = {
        'entries': [entry.as_dict() for entry in entries],
        'caveat': EXTRAPOLATION_CAVEAT,
    }
    return '\n'.join(lines), report


def kappa_sensitivity(entry, kappas, params=None):
    """
    Recompute an audit over a range of critical-depth constants.
    Always under the log law, where kappa is the only constant.

    Parameters
    ----------
    entry: AuditEntry or (name, depth, width) tuple
    kappas: Iterable of floats

    Returns
    -------
    sensitivity: List of dictionaries
        kappa, d_crit, ratio, and verdict per kappa value.

    Examples
    --------
    >>> import archscale.audit as audit
    >>> for row in audit.kappa_sensitivity(('Mistral-7B', 32, 4096), [2.09, 2.43, 2.77]):
    >>>     print(row['kappa'], row['verdict'])
    """
    if isinstance(entry, AuditEntry):
        name, depth, width = entry.name, entry.depth, entry.width
    else:
        name, depth, width = entry
    sensitivity = []
    for kappa in kappas:
        audited = audit_model(
            name, depth, width, params, kappa=kappa, form='LogLaw',
        )
        sensitivity.append({
            'kappa': audited.kappa,
            'd_crit': audited.d_crit,
            'ratio': audited.ratio,
            'verdict': audited.verdict,
        })
    return sensitivity


def redesign_shape(depth, width, params=None, width_step=64, name=None):
    """
    Widest shape at (at most) its own critical depth with about the same
    parameter count as a given shape.  The depth is floor(d_crit(W)) and
    the width solves N(D, W) = N(depth, width), iterated to a fixed
    point, then rounded to a multiple of width_step.

    Returns
    -------
    redesign: Dictionary
        'original' and 'redesign' shapes (depth, width, n_params,
        d_crit, ratio), the relative parameter change, and the
        published redesign for the model name when one exists.

    Examples
    --------
    >>> import archscale.audit as audit
    >>> redesign = audit.redesign_shape(96, 12288, name='GPT-3')
    >>> print(redesign['redesign']['depth'], redesign['redesign']['width'])
    24 24512
    """
    if params is None:
        params = PUBLISHED_PARAMS
    original = Architecture(depth, width)
    target = count_params(original)

    new_width = float(original.width)
    new_depth = original.depth
    for _ in range(50):
        new_depth = max(1, int(np.floor(d_crit(new_width, params))))
        # N = 12*D*W**2 + (2V + P + 4D + 2)*W
        a = 12.0 * new_depth
        b = 2.0*original.vocab + original.context + 4.0*new_depth + 2.0
        root = (-b + np.sqrt(b**2 + 4.0*a*target)) / (2.0*a)
        if np.abs(root - new_width) < 0.5:
            new_width = root
            break
        new_width = root
    new_width = max(width_step, int(np.round(new_width/width_step))*width_step)
    new_depth = max(1, int(np.floor(d_crit(new_width, params))))
    arch = Architecture(new_depth, new_width)

    def describe(shape):
        dcrit = d_crit(shape.width, params)
        return {
            'depth': shape.depth,
            'width': shape.width,
            'n_params': count_params(shape),
            'd_crit': dcrit,
            'ratio': shape.depth / dcrit,
        }

    redesign = {
        'name': name,
        'original': describe(original),
        'redesign': describe(arch),
        'param_change': count_params(arch)/target - 1.0,
        'published': None,
    }
    if name in PUBLISHED_REDESIGN:
        pub_depth, pub_width = PUBLISHED_REDESIGN[name]
        redesign['published'] = {'depth': pub_depth, 'width': pub_width}
    return redesign
