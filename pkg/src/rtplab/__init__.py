"""rtplab: deterministic RTP/RTCP streaming quality testbed.

Synthetic audio/video flows are packetized into RTP, pushed through a
userspace impairment channel (loss, delay/jitter, bandwidth pipe, token
bucket), measured with standard RTCP statistics, and orchestrated over an
experiment matrix.  A companion HTTP service collects subjective ratings.
"""

__version__ = "0.1.0"

from rtplab.errors import ConfigurationError, ProtocolError, RtplabError

__all__ = ["ConfigurationError", "ProtocolError", "RtplabError", "__version__"]
