# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__all__ = [
    'model',
    'fit',
    'gradsim',
    'planner',
    'audit',
    'dataset',
    'plotly_io',
    'utils',
]

from . import model
from . import fit
from . import gradsim
from . import planner
from . import audit
from . import dataset
from . import plotly_io
from . import utils
from .version import __version__


# Clean up top-level namespace--delete everything that isn't in __all__
# or is a magic attribute, and that isn't a submodule of this package
for varname in dir():
    if not ((varname.startswith('__') and varname.endswith('__')) or
            varname in __all__):
        del locals()[varname]
del(varname)
