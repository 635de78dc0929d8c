from ._hamlag import *  # noqa: F401,F403
