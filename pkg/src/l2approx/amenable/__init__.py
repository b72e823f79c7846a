"""Equivariant simplicial complexes, amenable exhaustions and the cap-product
duality operator."""

from .cover import *  # noqa: F401,F403
from .driver import *  # noqa: F401,F403
from .duality import *  # noqa: F401,F403
from .simplicial import *  # noqa: F401,F403
