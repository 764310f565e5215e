"""Hot-kernel selection: compiled extension if built, pure Python otherwise.

Set ``RTPLAB_PURE_KERNELS=1`` to force the pure implementation (used by the
benchmark and the cross-check tests).  Both backends are bit-identical, so
simulation results do not depend on which one is loaded.
"""

import hashlib
import os

if os.environ.get("RTPLAB_PURE_KERNELS") == "1":
    from rtplab import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from rtplab import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from rtplab import _kernels_py as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

Rng = _impl.Rng
JitterEstimator = _impl.JitterEstimator
SequenceTracker = _impl.SequenceTracker
netem_decide = _impl.netem_decide


def derive_seed(*parts) -> int:
    """Stable 64-bit sub-seed from a master seed and string/int labels."""
    key = "/".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")
