"""Kernel backend selection.

``streamforest._core`` is a single source file that doubles as a Cython
extension and a plain Python module.  When the extension was built, the
import system picks up the shared object and the hot loops run compiled;
otherwise the interpreter runs the same file directly.  Set
``STREAMFOREST_BACKEND=interpreted`` (or ``compiled``) to force one side,
e.g. for the backend comparison benchmark.
"""

import importlib.util
import os
import sys
from pathlib import Path

_INTERPRETED_NAME = "streamforest._core_interpreted"


def load_interpreted():
    """Load the interpreted kernel from source, bypassing any extension."""
    if _INTERPRETED_NAME in sys.modules:
        return sys.modules[_INTERPRETED_NAME]
    path = Path(__file__).with_name("_core.py")
    spec = importlib.util.spec_from_file_location(_INTERPRETED_NAME, path)
    module = importlib.util.module_from_spec(spec)
    sys.modules[_INTERPRETED_NAME] = module
    spec.loader.exec_module(module)
    return module


def _select():
    forced = os.environ.get("STREAMFOREST_BACKEND", "auto").strip().lower()
    if forced in ("", "auto"):
        from . import _core

        return _core
    if forced in ("compiled", "c", "cy", "ext"):
        from . import _core

        if not _core.COMPILED:
            raise ImportError(
                "STREAMFOREST_BACKEND=compiled, but the extension is not built; "
                "run `python setup.py build_ext --inplace` or reinstall"
            )
        return _core
    if forced in ("interpreted", "pure", "py", "python"):
        from . import _core

        if not _core.COMPILED:
            return _core
        return load_interpreted()
    raise ImportError(f"unknown STREAMFOREST_BACKEND value: {forced!r}")


core = _select()
backend_name = "compiled" if core.COMPILED else "interpreted"
