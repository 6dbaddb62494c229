"""Second-quantized linear optics with post-selected detection."""

from .elements import (
    HWP, PBS, PPBS, QWP, Jones, OpticalElement, PathPhase, Phase, SwapPaths, prepare_plates,
)
from .kernel import available_backends, backend_name, set_backend, use_backend
from .modes import ModeId, ModeRegistry, UnknownPathError
from .sources import (
    PairSource,
    SourceConfig,
    emission_state,
    set_internal_overlap,
    uniform_overlap,
)
from .state import (
    PNR,
    THRESHOLD,
    Branch,
    DetectionPattern,
    FockError,
    FockState,
    PolarizationQubit,
    Port,
    PostSelection,
    RailQubit,
    apply_element,
    coincidence_branches,
    make_veto,
    post_select,
    propagate,
    to_qubits,
)

__all__ = [
    "HWP", "PBS", "PPBS", "QWP", "Jones", "OpticalElement", "PathPhase", "Phase",
    "SwapPaths", "prepare_plates",
    "available_backends", "backend_name", "set_backend", "use_backend",
    "ModeId", "ModeRegistry", "UnknownPathError",
    "PairSource", "SourceConfig", "emission_state", "set_internal_overlap",
    "uniform_overlap",
    "PNR", "THRESHOLD", "Branch", "DetectionPattern", "FockError", "FockState",
    "PolarizationQubit", "Port", "PostSelection", "RailQubit", "apply_element",
    "coincidence_branches", "make_veto", "post_select", "propagate", "to_qubits",
]
