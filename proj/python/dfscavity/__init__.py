"""Two cavity modes damped by a common reservoir.

Closed-form propagation via the factorized superoperator, a brute-force
RK4 Lindblad integrator to check it against, the two-atom fringe protocol,
and decoherence-free subspace detection and construction. Everything here
is a thin re-export of the compiled core.
"""

from ._dfscavity import *  # noqa: F401,F403
from ._dfscavity import __version__  # noqa: F401
