"""Refinement and evaluation of multi-object tracks for static-asset counting."""

__version__ = "0.1.0"

from .assignment import exhaustive_assignment, iou, solve_assignment
from .counting import CountVector, CountingErrors, count_tracks, counting_errors, relative_reduction
from .errors import (
    DuplicateRecordError,
    ParseError,
    TrackCountError,
    UndefinedMetricError,
    ValidationError,
)
from .metrics import (
    ClearMotResult,
    HotaResult,
    IdentityResult,
    bootstrap_summary,
    clear_mot,
    hota,
    idf1,
)
from .model import BoundingBox, Detection, SequenceTracks, Track, normalized_center
from .motio import SequenceMeta, parse_mot_file, read_meta, write_mot_file
from .refine import HeuristicConfig, apply_h1, merge_tracks, refine_pipeline
from .simulate import NoiseModel, SimConfig, corrupt, generate_scene, preset_scenario
