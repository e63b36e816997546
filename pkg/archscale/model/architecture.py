# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'VOCAB',
    'CONTEXT',
    'SCALE_GROUPS',
    'Architecture',
    'TrainingBudget',
    'LossRecord',
    'count_params',
    'count_params_grid',
    'compute_flops',
    'explain_params',
    'normalize_group',
]

import numpy as np


# GPT-2 BPE vocabulary and positional-embedding length
VOCAB = 50257
CONTEXT = 1024

SCALE_GROUPS = (
    'Baseline',
    'OneB',
    'ThreeB',
    'SevenB',
)

_group_aliases = {
    'baseline': 'Baseline',
    'base': 'Baseline',
    'oneb': 'OneB',
    '1b': 'OneB',
    'threeb': 'ThreeB',
    '3b': 'ThreeB',
    'sevenb': 'SevenB',
    '7b': 'SevenB',
}


def normalize_group(group):
    """
    Map a scale-group name or alias (e.g., '1B', 'oneb') to its
    canonical name.

    Examples
    --------
    >>> import archscale.model as m
    >>> m.normalize_group('7B')
    'SevenB'
    """
    key = str(group).strip().lower()
    if key not in _group_aliases:
        raise ValueError(f"Invalid scale group: '{group}'")
    return _group_aliases[key]


def _as_count(value, name, minimum):
    if isinstance(value, (bool, np.bool_)):
        raise ValueError(f'{name} must be an integer, got {value!r}')
    if isinstance(value, (float, np.floating)):
        if not float(value).is_integer():
            raise ValueError(f'{name} must be an integer, got {value!r}')
    try:
        count = int(value)
    except (TypeError, ValueError):
        raise ValueError(f'{name} must be an integer, got {value!r}')
    if count < minimum:
        raise ValueError(f'{name} must be >= {minimum}, got {count}')
    return count


class Architecture():
    """
    A decoder-only transformer shape.

    Parameters
    ----------
    depth: Integer
        Number of transformer blocks (D).
    width: Integer
        Hidden dimension (W).
    vocab: Integer
        Vocabulary size (V).
    context: Integer
        Length of the learned positional embedding (P).

    Examples
    --------
    >>> import archscale.model as m
    >>> arch = m.Architecture(depth=16, width=512)
    >>> print(arch.n_params)
    102352896
    """
    def __init__(self, depth, width, vocab=VOCAB, context=CONTEXT):
        self.depth = _as_count(depth, 'depth', 1)
        self.width = _as_count(width, 'width', 1)
        self.vocab = _as_count(vocab, 'vocab', 0)
        self.context = _as_count(context, 'context', 0)

    @property
    def core_params(self):
        """Attention plus MLP weights of all blocks: 12*D*W**2"""
        return 12 * self.depth * self.width**2

    @property
    def n_params(self):
        return count_params(self)

    def explain(self):
        """
        Per-term breakdown of the parameter count.

        Returns
        -------
        terms: Dictionary
            Integer counts for 'blocks', 'embeddings', 'positional',
            'layer_norms', 'final_norm', and their 'total'.
        """
        D = self.depth
        W = self.width
        terms = {
            'blocks': 12 * D * W**2,
            'embeddings': 2 * self.vocab * W,
            'positional': self.context * W,
            'layer_norms': 4 * D * W,
            'final_norm': 2 * W,
        }
        terms['total'] = sum(terms.values())
        return terms

    def as_dict(self):
        return {
            'depth': self.depth,
            'width': self.width,
            'vocab': self.vocab,
            'context': self.context,
        }

    def __eq__(self, other):
        if not isinstance(other, Architecture):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((self.depth, self.width, self.vocab, self.context))

    def __repr__(self):
        return (
            f'Architecture(depth={self.depth}, width={self.width}, '
            f'vocab={self.vocab}, context={self.context})'
        )

    def __str__(self):
        return f'{self.depth}L x {self.width}W'


def count_params(arch):
    """
    Total parameter count of an architecture:
        N = 12*D*W**2 + 2*V*W + P*W + 4*D*W + 2*W

    The 2*V*W term counts the input embedding and the output projection
    separately.  The 4*D*W term holds the two layer-norm gain/bias
    pairs of each block, and 2*W the final layer norm.

    Parameters
    ----------
    arch: Architecture

    Returns
    -------
    n_params: Integer

    Examples
    --------
    >>> import archscale.model as m
    >>> m.count_params(m.Architecture(2, 256))
    27569152
    >>> m.count_params(m.Architecture(1, 1, vocab=0, context=0))
    18
    """
    return arch.explain()['total']


def count_params_grid(depth, width, vocab=VOCAB, context=CONTEXT):
    """
    Vectorized count_params() over broadcastable integer arrays.
    Counts are exact in int64 for D <= 1e4 and W <= 1e6.
    """
    D = np.asarray(depth, dtype=np.int64)
    W = np.asarray(width, dtype=np.int64)
    V = np.int64(vocab)
    P = np.int64(context)
    return 12*D*W**2 + 2*V*W + P*W + 4*D*W + 2*W


def compute_flops(arch, tokens):
    """
    Training compute C = 6*N*T (FLOPs), in double precision.

    Parameters
    ----------
    arch: Architecture
    tokens: Float
        Number of training tokens (T > 0).

    Examples
    --------
    >>> import archscale.model as m
    >>> flops = m.compute_flops(m.Architecture(16, 512), 6.4e9)
    >>> print(f'{flops:.3e}')
    3.930e+18
    """
    tokens = float(tokens)
    if not np.isfinite(tokens) or tokens <= 0:
        raise ValueError(f'tokens must be positive, got {tokens}')
    return 6.0 * float(count_params(arch)) * tokens


def explain_params(arch):
    """
    Plain-text parameter breakdown (what 'archscale predict --explain'
    prints).
    """
    terms = arch.explain()
    D = arch.depth
    W = arch.width
    labels = {
        'blocks': f'12*D*W^2      (12*{D}*{W}^2)',
        'embeddings': f'2*V*W         (2*{arch.vocab}*{W})',
        'positional': f'P*W           ({arch.context}*{W})',
        'layer_norms': f'4*D*W         (4*{D}*{W})',
        'final_norm': f'2*W           (2*{W})',
        'total': 'total',
    }
    lines = [f'Parameter count for {arch}:']
    for key, label in labels.items():
        if key == 'total':
            lines.append('-' * 48)
        lines.append(f'{label:32s} {terms[key]:>15,d}')
    return '\n'.join(lines)


class TrainingBudget():
    """
    Training tokens and compute of an architecture, tied by C = 6*N*T.
    Specify exactly one of tokens or compute.

    Examples
    --------
    >>> import archscale.model as m
    >>> arch = m.Architecture(32, 4096)
    >>> budget = m.TrainingBudget(arch, compute=5.89e21)
    >>> print(f'{budget.tokens:.3e}')
    1.431e+11
    """
    def __init__(self, arch, tokens=None, compute=None):
        if (tokens is None) == (compute is None):
            raise ValueError('Specify exactly one of tokens or compute')
        self.arch = arch
        n_params = float(count_params(arch))
        if tokens is not None:
            self.tokens = float(tokens)
            self.compute = compute_flops(arch, self.tokens)
        else:
            compute = float(compute)
            if not np.isfinite(compute) or compute <= 0:
                raise ValueError(f'compute must be positive, got {compute}')
            self.compute = compute
            self.tokens = compute / (6.0 * n_params)

    def __str__(self):
        return (
            f'{self.arch}: T = {self.tokens:.4e} tokens, '
            f'C = {self.compute:.4e} FLOPs'
        )


class LossRecord():
    """
    One trained-model observation.

    Parameters
    ----------
    arch: Architecture
    loss: Float
        Final validation loss (nats).
    tokens_billions: Float or None
        Training tokens in billions; None when unknown.
    scale_group: String
        One of 'Baseline', 'OneB', 'ThreeB', 'SevenB' (aliases such as
        '1B' are accepted).
    params_millions: Float or None
        Parameter count as printed in the results table (millions).
        When given it must agree with count_params() within 2%.
    """
    def __init__(
        self, arch, loss, tokens_billions=None, scale_group='Baseline',
        params_millions=None,
    ):
        self.arch = arch
        self.loss = float(loss)
        if not np.isfinite(self.loss) or self.loss <= 0:
            raise ValueError(f'loss must be positive, got {loss}')

        if tokens_billions is not None:
            tokens_billions = float(tokens_billions)
            if not np.isfinite(tokens_billions) or tokens_billions <= 0:
                raise ValueError(
                    f'tokens_billions must be positive, got {tokens_billions}'
                )
        self.tokens_billions = tokens_billions
        self.scale_group = normalize_group(scale_group)

        if params_millions is not None:
            params_millions = float(params_millions)
            reported = params_millions * 1e6
            n_params = count_params(arch)
            mismatch = np.abs(reported - n_params) / reported
            if mismatch > 0.02:
                raise ValueError(
                    f'Reported parameter count {params_millions}M differs from '
                    f'the computed {n_params/1e6:.1f}M for {arch} by '
                    f'{100*mismatch:.1f}% (> 2%)'
                )
        self.params_millions = params_millions

    @property
    def depth(self):
        return self.arch.depth

    @property
    def width(self):
        return self.arch.width

    @property
    def tokens(self):
        """Training tokens (count), None if unknown"""
        if self.tokens_billions is None:
            return None
        return self.tokens_billions * 1e9

    @property
    def params_reported(self):
        if self.params_millions is None:
            return None
        return self.params_millions * 1e6

    @property
    def key(self):
        return (self.arch.depth, self.arch.width, self.scale_group)

    def as_dict(self):
        return {
            'depth': self.arch.depth,
            'width': self.arch.width,
            'vocab': self.arch.vocab,
            'context': self.arch.context,
            'tokens_billions': self.tokens_billions,
            'loss': self.loss,
            'scale_group': self.scale_group,
            'params_millions': self.params_millions,
        }

    def __eq__(self, other):
        if not isinstance(other, LossRecord):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __repr__(self):
        return (
            f'LossRecord({self.arch!r}, loss={self.loss}, '
            f'tokens_billions={self.tokens_billions}, '
            f"scale_group='{self.scale_group}')"
        )
