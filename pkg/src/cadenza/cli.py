"""Command-line interface: curate, harmonize, arrange, stats, serve.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 I/O error.
Outputs are deterministic: the same inputs and flags produce byte-identical
files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path
from typing import Optional, Sequence

from .arrange import ArrangerConfig, Complexity, arrange, load_textures
from .harmonize import HarmonizerConfig, harmonize, load_micro_table
from .library import (
    CurateOptions,
    StyleLabel,
    TransitionStats,
    curate,
    default_library_path,
    load_library,
    load_style_map,
    save_library,
)
from .midi import (
    AnnotationSidecar,
    TrackSpec,
    load_annotation,
    melody_track_spec,
    parse_melody_midi,
    write_arrangement_midi,
    write_midi_bytes,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

LIBRARY_ENV_VAR = "CADENZA_LIBRARY"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        raise _UsageError(message)


_CONFIG_KEYS = ("library", "textures", "micro_table", "alpha", "beta", "tempo")


def _load_config(args: argparse.Namespace) -> dict:
    """Optional JSON config carrying data paths and default weights.

    Precedence everywhere: explicit flag > config file > environment >
    bundled default.
    """
    path = getattr(args, "config", None)
    if not path:
        return {}
    try:
        raw = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config file {path}: invalid JSON ({exc})")
    if not isinstance(raw, dict):
        raise _UsageError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(raw) - set(_CONFIG_KEYS))
    if unknown:
        raise _UsageError(
            f"config file {path}: unknown keys {unknown}; "
            f"expected a subset of {list(_CONFIG_KEYS)}"
        )
    return raw


def _library_path(explicit: Optional[str], config: dict = {}) -> Path:
    if explicit:
        return Path(explicit)
    if config.get("library"):
        return Path(config["library"])
    from_env = os.environ.get(LIBRARY_ENV_VAR)
    if from_env:
        return Path(from_env)
    return default_library_path()


def _annotation_from_args(args: argparse.Namespace) -> AnnotationSidecar:
    if args.annotation:
        return load_annotation(args.annotation)
    missing = [flag for flag, value in
               (("--phrases", args.phrases), ("--key", args.key), ("--mode", args.mode))
               if not value]
    if missing:
        raise _UsageError(
            "provide --annotation FILE or all of --phrases/--key/--mode "
            f"(missing {', '.join(missing)})"
        )
    return AnnotationSidecar(args.phrases, args.key, args.mode, args.meter)


def _ratio(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return number


def _add_annotation_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--annotation", help="JSON sidecar with phrases/key/mode/meter")
    parser.add_argument("--phrases", help="phrase string such as A8A8B8")
    parser.add_argument("--key", help="tonic note name, e.g. C or F#")
    parser.add_argument("--mode", help="major or minor")
    parser.add_argument("--meter", default="4/4", help="4/4 (default) or 2/4")
    parser.add_argument("--melody-track", help="name of the melody track to parse")


def _harmonizer_config(args: argparse.Namespace, config: dict) -> HarmonizerConfig:
    style_filter = None
    if args.style:
        try:
            style_filter = frozenset({StyleLabel(args.style)})
        except ValueError:
            raise _UsageError(
                f"unknown style {args.style!r}; expected one of "
                f"{sorted(s.value for s in StyleLabel)}"
            )
    table_path = args.micro_table or config.get("micro_table")
    table = load_micro_table(table_path) if table_path else None
    alpha = args.alpha if args.alpha is not None else config.get("alpha", 0.1)
    beta = args.beta if args.beta is not None else config.get("beta", 0.5)
    kwargs = {"alpha": alpha, "beta": beta, "style_filter": style_filter}
    if table is not None:
        kwargs["micro_table"] = table
    try:
        return HarmonizerConfig(**kwargs)
    except ValueError as exc:
        raise _UsageError(str(exc))


def _tempo(args: argparse.Namespace, config: dict) -> float:
    return args.tempo if args.tempo is not None else float(config.get("tempo", 120.0))


def cmd_curate(args: argparse.Namespace) -> int:
    style_map = load_style_map(args.style_map)
    options = CurateOptions(
        thin_slot_ratio=args.thin_slot_ratio,
        min_simultaneous=args.min_simultaneous,
        ioi_entropy_threshold=args.ioi_entropy,
    )
    library, report = curate(args.midi_dir, style_map, options)
    save_library(library, args.out)
    report_text = report.text()
    if args.report:
        Path(args.report).write_text(report_text + "\n", "utf-8")
    print(report_text)
    print(f"wrote {library.N} templates to {args.out}")
    return EXIT_OK


def cmd_harmonize(args: argparse.Namespace) -> int:
    file_config = _load_config(args)
    config = _harmonizer_config(args, file_config)
    annotation = _annotation_from_args(args)
    melody = parse_melody_midi(args.melody, annotation, melody_track=args.melody_track)
    library = load_library(_library_path(args.library, file_config))
    stats = TransitionStats.build(library)
    result = harmonize(melody, library, stats, config)
    out = Path(args.out)
    out.write_text(result.to_json(), "utf-8")
    lead_sheet = out.with_suffix(".mid")
    if args.lead_sheet:
        lead_sheet = Path(args.lead_sheet)
    data = write_midi_bytes(
        [
            melody_track_spec(melody),
            TrackSpec("chords", result.lead_sheet_voicing(), channel=1),
        ],
        tempo_bpm=_tempo(args, file_config),
        time_signature=melody.meter,
    )
    lead_sheet.write_bytes(data)
    for choice in result.choices:
        style = choice.chosen.style.value if choice.chosen.style else "mixed"
        print(f"phrase {choice.phrase_index} [{choice.label}] "
              f"{choice.identity} ({style}, {choice.chosen.id_string})")
    print(f"total score {result.total_score:.6f}")
    print(f"wrote {out} and {lead_sheet}")
    return EXIT_OK


def cmd_arrange(args: argparse.Namespace) -> int:
    file_config = _load_config(args)
    config = _harmonizer_config(args, file_config)
    try:
        complexity = Complexity(args.complexity)
    except ValueError:
        raise _UsageError(
            f"unknown complexity {args.complexity!r}; expected one of "
            f"{sorted(c.value for c in Complexity)}"
        )
    annotation = _annotation_from_args(args)
    melody = parse_melody_midi(args.melody, annotation, melody_track=args.melody_track)
    library = load_library(_library_path(args.library, file_config))
    stats = TransitionStats.build(library)
    textures = load_textures(args.textures or file_config.get("textures"))
    result = harmonize(melody, library, stats, config)
    arrangement = arrange(melody, result, textures, complexity, ArrangerConfig())
    write_arrangement_midi(arrangement, args.out, tempo_bpm=_tempo(args, file_config))
    print(f"textures: {', '.join(arrangement.texture_ids)}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    library = load_library(_library_path(args.library, _load_config(args)))
    lengths = Counter(t.length_bars for t in library)
    table: Counter[tuple[str, str]] = Counter(
        (t.style.value, t.mode.value) for t in library
    )
    print(f"templates: {library.N}")
    print("lengths:")
    for bars in sorted(lengths):
        print(f"  {bars} bars: {lengths[bars]}")
    print("style x mode:")
    styles = sorted({s for s, _ in table})
    for style in styles:
        major = table.get((style, "major"), 0)
        minor = table.get((style, "minor"), 0)
        print(f"  {style}: major {major}, minor {minor}, total {major + minor}")
    stats = TransitionStats.build(library)
    print(f"distinct two-bar windows: {len(stats.counts)}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    file_config = _load_config(args)
    app = create_app(
        library_path=_library_path(args.library, file_config),
        texture_path=args.textures or file_config.get("textures"),
        session_ttl_seconds=args.session_ttl,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="cadenza", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_curate = sub.add_parser("curate", help="curate a MIDI corpus into a library")
    p_curate.add_argument("midi_dir", help="directory of chord-progression MIDI files")
    p_curate.add_argument("--style-map", required=True, help="raw-label mapping file")
    p_curate.add_argument("--out", required=True, help="library file to write")
    p_curate.add_argument("--report", help="also write the curation report here")
    p_curate.add_argument("--thin-slot-ratio", type=float, default=0.4)
    p_curate.add_argument("--min-simultaneous", type=int, default=3)
    p_curate.add_argument("--ioi-entropy", type=float, default=2.0)
    p_curate.set_defaults(func=cmd_curate)

    library_help = f"library file (default ${LIBRARY_ENV_VAR} or bundled)"
    config_help = "JSON config with data paths and default weights"

    p_harm = sub.add_parser("harmonize", help="harmonize a melody MIDI")
    p_harm.add_argument("melody", help="melody MIDI file")
    _add_annotation_flags(p_harm)
    p_harm.add_argument("--library", help=library_help)
    p_harm.add_argument("--config", help=config_help)
    p_harm.add_argument("--alpha", type=_ratio, default=None, help="default 0.1")
    p_harm.add_argument("--beta", type=_ratio, default=None, help="default 0.5")
    p_harm.add_argument("--style", help="restrict candidates to one style")
    p_harm.add_argument("--micro-table", help="alternative micro-loss table file")
    p_harm.add_argument("--tempo", type=float, default=None, help="default 120")
    p_harm.add_argument("--lead-sheet", help="lead-sheet MIDI path (default: out with .mid)")
    p_harm.add_argument("--out", required=True, help="harmonization JSON to write")
    p_harm.set_defaults(func=cmd_harmonize)

    p_arr = sub.add_parser("arrange", help="harmonize and arrange a melody MIDI")
    p_arr.add_argument("melody", help="melody MIDI file")
    _add_annotation_flags(p_arr)
    p_arr.add_argument("--library", help=library_help)
    p_arr.add_argument("--config", help=config_help)
    p_arr.add_argument("--textures", help="texture library file (default bundled)")
    p_arr.add_argument("--alpha", type=_ratio, default=None, help="default 0.1")
    p_arr.add_argument("--beta", type=_ratio, default=None, help="default 0.5")
    p_arr.add_argument("--style", help="restrict candidates to one style")
    p_arr.add_argument("--micro-table", help="alternative micro-loss table file")
    p_arr.add_argument("--complexity", default="medium", help="sparse, medium, or dense")
    p_arr.add_argument("--tempo", type=float, default=None, help="default 120")
    p_arr.add_argument("--out", required=True, help="arrangement MIDI to write")
    p_arr.set_defaults(func=cmd_arrange)

    p_stats = sub.add_parser("stats", help="print library statistics")
    p_stats.add_argument("--library", help=library_help)
    p_stats.add_argument("--config", help=config_help)
    p_stats.set_defaults(func=cmd_stats)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--library", help=library_help)
    p_serve.add_argument("--config", help=config_help)
    p_serve.add_argument("--textures", help="texture library file (default bundled)")
    p_serve.add_argument("--session-ttl", type=float, default=3600.0)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
