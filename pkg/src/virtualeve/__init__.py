"""Virtual-eavesdropper equivalence for colluding single-antenna eavesdroppers.

A set of colluding single-antenna Eves is replaced by one virtual Eve carrying a
linear movable-antenna array; its distance and antenna positions are fitted so
that the expected SNRs agree.
"""
from .channel import *  # noqa: F401,F403
from .errors import ConfigurationError, ConstraintError, DegenerateInstanceError, DomainError
from .expectation import *  # noqa: F401,F403
from .metrics import *  # noqa: F401,F403
from .montecarlo import *  # noqa: F401,F403
from .optimizer import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403

__version__ = "0.1.0"
