"""Kernel selection: compiled extension when available, pure Python otherwise.

Set BCHKIT_PURE_PYTHON=1 to force the fallback (used by the benchmark and by
the twin-equivalence tests).
"""

import os

if os.environ.get("BCHKIT_PURE_PYTHON") == "1":
    from bchkit import _kernels_py as _impl
else:
    try:
        from bchkit import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from bchkit import _kernels_py as _impl

IMPL = _impl.IMPL
rat_add = _impl.rat_add
rat_mul = _impl.rat_mul
dict_scaled_add = _impl.dict_scaled_add
word_mul = _impl.word_mul
op_mul = _impl.op_mul
series2_mul = _impl.series2_mul
poly3_mul = _impl.poly3_mul
