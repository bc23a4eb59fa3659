"""SH-SAW ladder filter design: mBVD modeling, extraction, synthesis and layout."""

__version__ = "0.1.0"

from .errors import SawLadderError  # noqa: E402
from .netcore import (FrequencyGrid, OnePortResponse, TwoPortResponse, make_grid)  # noqa: E402
from .mbvd import MbvdModel, MotionalBranch, admittance, resonator_figures  # noqa: E402
from .extraction import bode_q, fit_mbvd, resonance_markers  # noqa: E402
from .ladder import (DesignTargets, FilterMetrics, LadderTopology, canonical_ladder,  # noqa: E402
                     init_design, metrics, optimize, simulate)

__all__ = [
    "SawLadderError", "FrequencyGrid", "OnePortResponse", "TwoPortResponse", "make_grid",
    "MbvdModel", "MotionalBranch", "admittance", "resonator_figures",
    "bode_q", "fit_mbvd", "resonance_markers",
    "DesignTargets", "FilterMetrics", "LadderTopology", "canonical_ladder",
    "init_design", "metrics", "optimize", "simulate",
]
