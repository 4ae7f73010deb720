"""Hot text kernels with a compiled core and a pure-Python fallback.

The compiled Cython module is preferred when the extension was built;
otherwise the pure implementations are used. Callers should not care which
one is active beyond performance; ``BACKEND`` reports the selection and
``benchmarks/bench_kernels.py`` compares the two. Setting the
``CLAIMCHECK_PURE_KERNELS`` environment variable forces the fallback,
which is how the test suite exercises both paths.

Both backends expect id sequences as buffers of unsigned 32-bit ints
(``array('I')``) for ``lcs_length``.
"""

import os

from claimcheck.kernels import pure

if os.environ.get("CLAIMCHECK_PURE_KERNELS", "") not in ("", "0"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from claimcheck.kernels import _textcore as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

lcs_length = _impl.lcs_length
char_ngram_counts = _impl.char_ngram_counts

__all__ = ["BACKEND", "char_ngram_counts", "lcs_length", "pure"]
