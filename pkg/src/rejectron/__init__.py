"""Online active learning with a reject option."""

from ._accel import BACKEND
from .bounds import BoundInputs, BoundPreconditionError, Outcome, OutcomeCounters
from .data import Dataset, DatasetError, LibsvmFormatError, load_libsvm, resolve_dataset
from .kernel import KernelKind, KernelModel, KernelSpec, kernel_dral_step, kernel_dsal_step
from .linear import (
    Branch,
    LinearModel,
    Prediction,
    StepOutcome,
    StepSchedule,
    Variant,
    dral_step,
    dsal_step,
    dsol_step,
    init_model,
    predict,
)
from .losses import HyperParams
from .query import SeededRng, derive_seed

__version__ = "0.1.0"
