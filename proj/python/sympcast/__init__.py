"""Survey-panel prevalence prediction and forecasting toolkit."""

try:
    from ._sympcast import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:
    from _sympcast import *  # noqa: F401,F403  (in-tree build on PYTHONPATH)
