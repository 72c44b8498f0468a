"""Python interface to the fault-injection laboratory.

The heavy lifting lives in the compiled ``_faultline`` extension; campaign
and report documents are returned as the same JSON text the CLI writes.
"""

try:
    from ._faultline import *  # noqa: F401,F403  (installed package layout)
    from . import _faultline as _impl
except ImportError:  # build-tree layout: extension sits on sys.path directly
    from _faultline import *  # noqa: F401,F403
    import _faultline as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
