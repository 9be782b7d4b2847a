"""Select the compiled flow kernels when available, else the numpy fallback.

Set ``HOPFSOLITON_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

python_kernels = _kernels_py

if os.environ.get("HOPFSOLITON_BACKEND", "").lower() == "python":
    kernels = _kernels_py
    compiled_kernels = None
else:
    try:
        from . import _kernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None
    kernels = compiled_kernels if compiled_kernels is not None else _kernels_py

BACKEND = "cython" if kernels is not _kernels_py else "python"
