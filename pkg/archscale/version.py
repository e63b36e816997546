# Copyright (c) 2025 The archscale developers
# archscale is open-source software under the GPL-2.0 license

__version__ = '0.1.0'
