"""Melody harmonization and piano-accompaniment arrangement.

A phrase-annotated melody is matched against a curated library of chord
progression templates by a three-level loss (note-wise dissonance, phrase
integrity, inter-phrase smoothness) optimized with dynamic programming,
then textured into a two-track piano arrangement by template search and
chord-tone remapping.
"""

from .core import (
    AnnotatedMelody,
    ChordEvent,
    ChordProgression,
    Key,
    MelodyNote,
    Mode,
    Phrase,
    TriadQuality,
    VoicingNote,
    chord_degree,
    interval_pc,
    to_roman,
)
from .library import (
    CurateOptions,
    CurationReport,
    Library,
    StyleLabel,
    Template,
    TransitionStats,
    canonical_key,
    curate,
    dedup_signature,
    load_default_library,
    load_library,
    load_style_map,
    save_library,
)
from .harmonize import (
    Candidate,
    HarmonizationResult,
    HarmonizerConfig,
    MicroLossTable,
    PhraseChoice,
    generate_candidates,
    harmonize,
    load_default_micro_table,
    load_micro_table,
    macro_loss,
    meso_loss,
    micro_loss,
    select_style,
)
from .arrange import (
    Arrangement,
    ArrangerConfig,
    Complexity,
    TexturePhrase,
    arrange,
    coverage_violations,
    load_textures,
    phrase_fitness,
    reharmonize,
    search_textures,
)
from .midi import (
    AnnotationSidecar,
    load_annotation,
    parse_melody_midi,
    parse_phrase_string,
    write_arrangement_midi,
    write_melody_midi,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotatedMelody", "ChordEvent", "ChordProgression", "Key", "MelodyNote",
    "Mode", "Phrase", "TriadQuality", "VoicingNote", "chord_degree",
    "interval_pc", "to_roman",
    "CurateOptions", "CurationReport", "Library", "StyleLabel", "Template",
    "TransitionStats", "canonical_key", "curate", "dedup_signature",
    "load_default_library", "load_library", "load_style_map", "save_library",
    "Candidate", "HarmonizationResult", "HarmonizerConfig", "MicroLossTable",
    "PhraseChoice", "generate_candidates", "harmonize",
    "load_default_micro_table", "load_micro_table", "macro_loss", "meso_loss",
    "micro_loss", "select_style",
    "Arrangement", "ArrangerConfig", "Complexity", "TexturePhrase", "arrange",
    "coverage_violations", "load_textures", "phrase_fitness", "reharmonize",
    "search_textures",
    "AnnotationSidecar", "load_annotation", "parse_melody_midi",
    "parse_phrase_string", "write_arrangement_midi", "write_melody_midi",
    "__version__",
]
