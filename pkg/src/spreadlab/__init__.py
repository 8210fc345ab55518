"""spreadlab: a discrete-tick limit order book simulation laboratory.

Core pieces: the unit-volume order book (`book`), interior deposition
distributions (`deposition`), closed-form parity/spread-change analytics
(`analytics`), the Monte Carlo engine (`engine`), spread-event estimators
(`estimators`), virtual-stock parity chains (`parity_chain`), and quote-tape
ingestion (`tape`). A FastAPI service (`spreadlab.service`) exposes all of it
over HTTP and the CLI (`spreadlab.cli`) is a thin client of that service.
"""

__version__ = "0.1.0"

from .book import EventKind, OrderBook, Side
from .deposition import NonUniform, Uniform, mechanism_from_name
from .engine import SimConfig, Trajectory, run

__all__ = [
    "EventKind",
    "OrderBook",
    "Side",
    "NonUniform",
    "Uniform",
    "mechanism_from_name",
    "SimConfig",
    "Trajectory",
    "run",
    "__version__",
]
