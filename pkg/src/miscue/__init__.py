"""Reading-miscue annotation, evaluation, and prompted training-data prep."""

from .align import AlignmentScript, EditOp, align_words, edit_distance
from .annotation import (
    AnnotatedTranscript,
    MiscueEvent,
    derive_events,
    event_tags,
    parse,
    serialize,
    strip_markers,
)
from .corpus import (
    HypothesisRecord,
    SplitSpec,
    UtteranceRecord,
    load_manifest,
    make_speaker_splits,
    naive_predict,
)
from .dataprep import (
    PromptedExample,
    SkipNotice,
    VocabExtension,
    build_training_set,
    extend_vocab,
    pack_example,
)
from .evaluation import (
    EvalReport,
    TagPairing,
    WerResult,
    build_report,
    class_metrics,
    pair_tags,
    speaker_wer,
    utterance_wer,
)
from .textnorm import TokenizerAdapter, WordTokenizer, normalize_text

__version__ = "0.1.0"

__all__ = [
    "AlignmentScript",
    "AnnotatedTranscript",
    "EditOp",
    "EvalReport",
    "HypothesisRecord",
    "MiscueEvent",
    "PromptedExample",
    "SkipNotice",
    "SplitSpec",
    "TagPairing",
    "TokenizerAdapter",
    "UtteranceRecord",
    "VocabExtension",
    "WerResult",
    "WordTokenizer",
    "align_words",
    "build_report",
    "build_training_set",
    "class_metrics",
    "derive_events",
    "edit_distance",
    "event_tags",
    "extend_vocab",
    "load_manifest",
    "make_speaker_splits",
    "naive_predict",
    "normalize_text",
    "pack_example",
    "pair_tags",
    "parse",
    "serialize",
    "speaker_wer",
    "strip_markers",
    "utterance_wer",
]
