# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'PASSED',
    'FAILED',
    'SKIPPED',
    'LARGE_SCALE_ERRORS',
    'VerificationCheck',
    'VerificationReport',
    'verify_published_results',
]

import numpy as np

from ..utils import format_text


PASSED = 'PASSED'
FAILED = 'FAILED'
SKIPPED = 'SKIPPED'

# Published (best, over-deep) pairs at each large scale with their
# loss standard errors
LARGE_SCALE_ERRORS = {
    'OneB': ((24, 1792, 0.008), (80, 1024, 0.011)),
    'ThreeB': ((40, 2432, 0.006), (72, 1792, 0.009)),
    'SevenB': ((32, 4096, 0.006), (64, 2816, 0.008)),
}


class VerificationCheck():
    """
    Outcome of one named check: status is PASSED, FAILED, or SKIPPED.
    """
    def __init__(self, name, status, detail):
        self.name = name
        self.status = status
        self.detail = detail

    def as_dict(self):
        return {
            'name': self.name,
            'status': self.status,
            'detail': self.detail,
        }

    def __str__(self):
        return f'{self.status:7s}  {self.name}: {self.detail}'


class VerificationReport():
    """
    Collection of verification checks.  The report passes when no
    check failed; skipped checks do not count as passed.
    """
    def __init__(self, checks):
        self.checks = list(checks)

    @property
    def passed(self):
        return not any(check.status == FAILED for check in self.checks)

    @property
    def failed(self):
        return [check.name for check in self.checks if check.status==FAILED]

    @property
    def skipped(self):
        return [check.name for check in self.checks if check.status==SKIPPED]

    def __getitem__(self, name):
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self):
        return {
            'passed': self.passed,
            'checks': [check.as_dict() for check in self.checks],
        }

    def text(self, format=None):
        """
        Plain-text report, with failed (danger) and skipped (warning)
        checks highlighted when format is 'html' or 'rich'.
        """
        lines = []
        for check in self.checks:
            line = format_text(
                str(check),
                warning=check.status==SKIPPED,
                danger=check.status==FAILED,
                format=format,
            )
            lines.append(line)
        n_pass = sum(check.status == PASSED for check in self.checks)
        summary = (
            f'{n_pass} passed, {len(self.failed)} failed, '
            f'{len(self.skipped)} skipped'
        )
        lines.append(format_text(summary, danger=not self.passed, format=format))
        return '\n'.join(lines)

    def __str__(self):
        return self.text()


def _loss(dataset, depth, width, group='Baseline'):
    record = dataset.get(depth, width, group)
    if record is None:
        return None
    return record.loss


def _missing(name, shapes):
    labels = ', '.join(f'{d}L x {w}W ({g})' for d,w,g in shapes)
    return VerificationCheck(name, SKIPPED, f'missing {labels}')


def _check_gap(dataset, name, deep, shallow, group, expected=None, tol=None):
    """deep loss minus shallow loss: positive, and optionally near expected"""
    loss_deep = _loss(dataset, *deep, group)
    loss_shallow = _loss(dataset, *shallow, group)
    if loss_deep is None or loss_shallow is None:
        return _missing(name, [(*deep, group), (*shallow, group)])
    gap = loss_deep - loss_shallow
    detail = (
        f'loss({deep[0]}L x {deep[1]}W) - loss({shallow[0]}L x {shallow[1]}W)'
        f' = {loss_deep:.3f} - {loss_shallow:.3f} = {gap:.3f}'
    )
    ok = gap > 0
    if expected is not None:
        ok = ok and np.abs(gap - expected) <= tol
        detail += f' (expected {expected:.3f} +/- {tol})'
    return VerificationCheck(name, PASSED if ok else FAILED, detail)


def _check_width_sweep(dataset):
    name = 'width_sweep_16L'
    widths = [256, 512, 1024, 1536]
    losses = [_loss(dataset, 16, width) for width in widths]
    if None in losses:
        missing = [(16, w, 'Baseline') for w,l in zip(widths,losses) if l is None]
        return _missing(name, missing)
    ok = bool(np.all(np.diff(losses) < 0))
    sweep = ' > '.join(f'{loss:.3f}' for loss in losses)
    detail = f'16L losses over W = {widths}: {sweep}'
    return VerificationCheck(name, PASSED if ok else FAILED, detail)


def _check_u_shape(dataset):
    name = 'depth_u_shape_512W'
    depths = [2, 8, 16, 24]
    losses = [_loss(dataset, depth, 512) for depth in depths]
    if None in losses:
        missing = [(d, 512, 'Baseline') for d,l in zip(depths,losses) if l is None]
        return _missing(name, missing)
    best = depths[int(np.argmin(losses))]
    sweep = ', '.join(f'{d}L: {l:.3f}' for d,l in zip(depths, losses))
    detail = f'minimum at {best}L over ({sweep})'
    return VerificationCheck(name, PASSED if best==16 else FAILED, detail)


def _check_significance(dataset, group, label):
    name = f'gap_significance_{label}'
    (d1, w1, se1), (d2, w2, se2) = LARGE_SCALE_ERRORS[group]
    best = _loss(dataset, d1, w1, group)
    deep = _loss(dataset, d2, w2, group)
    if best is None or deep is None:
        return _missing(name, [(d1, w1, group), (d2, w2, group)])
    gap = deep - best
    sigma = np.hypot(se1, se2)
    ok = gap > 3.0*sigma
    detail = (
        f'{d2}L x {w2}W - {d1}L x {w1}W = {gap:.3f} nats, '
        f'{gap/sigma:.1f} combined standard errors ({sigma:.4f})'
    )
    return VerificationCheck(name, PASSED if ok else FAILED, detail)


def _check_best_not_deepest(dataset, group, label):
    name = f'best_not_deepest_{label}'
    records = [record for record in dataset if record.scale_group == group]
    if len(records) < 2:
        return VerificationCheck(
            name, SKIPPED, f'fewer than two {group} records',
        )
    depths = np.array([record.depth for record in records])
    losses = np.array([record.loss for record in records])
    best = records[int(np.argmin(losses))]
    ok = best.depth < np.amax(depths)
    detail = (
        f'best {best.depth}L x {best.width}W ({best.loss:.3f}), '
        f'deepest is {np.amax(depths)}L'
    )
    return VerificationCheck(name, PASSED if ok else FAILED, detail)


def verify_published_results(dataset):
    """
    Check that the headline orderings of the depth-delusion experiments
    hold in a dataset.

    Checks
    ------
    depth_delusion_24L: loss(24L x 512W) > loss(16L x 512W),
        gap 0.033 +/- 0.0005 nats.
    depth_delusion_32L: loss(32L x 512W) > loss(16L x 512W).
    width_sweep_16L: 16L losses strictly decrease over
        W = 256, 512, 1024, 1536.
    depth_u_shape_512W: the 512W minimum over 2, 8, 16, 24 layers
        is at 16L.
    gap_7B: loss(64L x 2816W) - loss(32L x 4096W) = 0.119 +/- 0.001.
    gap_significance_{1B,3B,7B}: each over-deep gap exceeds three
        combined standard errors.
    best_not_deepest_{1B,3B,7B}: the best run of each large scale is
        not its deepest.

    Checks whose rows are missing are SKIPPED (never PASSED).

    Parameters
    ----------
    dataset: Dataset

    Returns
    -------
    report: VerificationReport

    Examples
    --------
    >>> import archscale.dataset as ds
    >>> report = ds.verify_published_results(ds.load_bundled())
    >>> print(report.passed)
    True
    """
    checks = [
        _check_gap(
            dataset, 'depth_delusion_24L', (24, 512), (16, 512), 'Baseline',
            expected=0.033, tol=0.0005,
        ),
        _check_gap(
            dataset, 'depth_delusion_32L', (32, 512), (16, 512), 'Baseline',
        ),
        _check_width_sweep(dataset),
        _check_u_shape(dataset),
        _check_gap(
            dataset, 'gap_7B', (64, 2816), (32, 4096), 'SevenB',
            expected=0.119, tol=0.001,
        ),
    ]
    labels = {'OneB': '1B', 'ThreeB': '3B', 'SevenB': '7B'}
    for group, label in labels.items():
        checks.append(_check_significance(dataset, group, label))
    for group, label in labels.items():
        checks.append(_check_best_not_deepest(dataset, group, label))
    return VerificationReport(checks)
