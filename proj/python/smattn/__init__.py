from ._smattn import *  # noqa: F401,F403
