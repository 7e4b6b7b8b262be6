"""Online single-time gesture spotting over per-frame class score streams."""

from gesture_spotter.core import (
    CLASS_NAMES,
    GESTURE_CLASSES,
    NUM_CLASSES,
    Annotation,
    ClassId,
    DetectionEvent,
    Hand,
    Modality,
    ScoreFrame,
    StreamHeader,
    annotations_to_sequence,
    is_background,
    is_gesture,
    validate_frame,
)
from gesture_spotter.transition import TransitionEngine, TransitionMatrix, WindowConfig, transition_prob_direct
from gesture_spotter.activation import ActivationConfig, OnlineDetector, SingleTimeActivator, merge_hands, run_stream
from gesture_spotter.evaluation import EvalReport, evaluate_run, levenshtein_accuracy, levenshtein_distance
from gesture_spotter.streamio import FormatError, ScoreStreamFile, read_score_stream, write_score_stream
from gesture_spotter.fusion import FusionConfig, fuse_streams
from gesture_spotter.synth import SynthConfig, generate_corpus
from gesture_spotter.calibration import CalibrationGrid, calibrate
from gesture_spotter.sources import detect_source

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "GESTURE_CLASSES",
    "NUM_CLASSES",
    "ActivationConfig",
    "Annotation",
    "ClassId",
    "DetectionEvent",
    "CalibrationGrid",
    "EvalReport",
    "FormatError",
    "FusionConfig",
    "Hand",
    "Modality",
    "OnlineDetector",
    "ScoreFrame",
    "ScoreStreamFile",
    "SingleTimeActivator",
    "StreamHeader",
    "SynthConfig",
    "TransitionEngine",
    "TransitionMatrix",
    "WindowConfig",
    "annotations_to_sequence",
    "calibrate",
    "detect_source",
    "evaluate_run",
    "fuse_streams",
    "generate_corpus",
    "is_background",
    "is_gesture",
    "levenshtein_accuracy",
    "levenshtein_distance",
    "merge_hands",
    "read_score_stream",
    "run_stream",
    "transition_prob_direct",
    "validate_frame",
    "write_score_stream",
]
