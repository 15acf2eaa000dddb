"""Mean-field heavy-ball training dynamics (C++ core)."""

try:
    from ._mfhb import *  # noqa: F401,F403
    from ._mfhb import __version__  # noqa: F401
except ImportError:  # in-tree builds put the extension on PYTHONPATH directly
    from _mfhb import *  # noqa: F401,F403
    from _mfhb import __version__  # noqa: F401
