"""driftlab: update strength vs genetic drift in model-building optimizers.

Simulates the compact GA and a two-individual MMAS on OneMax, decomposes
per-bit model changes into random-walk and biased steps, and verifies the
drift bounds, walk potentials and runtime scalings against exact
small-instance oracles.
"""

from .core import (
    AlgorithmState,
    CgaRule,
    MarginalVector,
    MmasRule,
    RunConfig,
    RunRecord,
    border_interval,
    cga_update,
    clamp_borders,
    evaluate_onemax,
    make_rule,
    mmas_update,
    run,
    sample_offspring,
    select_winner,
    step,
)
from .instrument import (
    BorderEvent,
    StepCollector,
    StepKind,
    StepRecord,
    Trajectory,
    classify_step,
    detect_border_hits,
    margin_excluding_bit,
    record_step,
    rw_displacement,
)

__version__ = "0.1.0"
