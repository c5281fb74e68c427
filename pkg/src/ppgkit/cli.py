"""Command-line surface over the library.

Every subcommand is a thin shell over a library operation: scalars printed
here equal the library results exactly. Exit codes: 0 ok, 2 usage,
3 I/O or file-format problems, 4 validation failures on otherwise
well-formed data.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .core import PhonemeSet, canonical_phoneme_set
from .distance import (
    DEFAULT_GAMMA,
    DistanceConfig,
    compute_class_weights,
    compute_similarity,
    tune_gamma,
    utterance_distance,
)
from .edit import apply_rules, compile_rules, interpolate_region
from .errors import FormatError, PpgError, ValidationError
from .formats import (
    alignment_frame_count,
    alignment_to_frame_labels,
    load_class_weights,
    load_ppg,
    load_similarity,
    read_alignment,
    read_pitch,
    save_class_weights,
    save_ppg,
    save_similarity,
)
from .metrics import PERIODICITY_THRESHOLD, delta_cents, framewise_accuracy

EXIT_IO = 3
EXIT_VALIDATION = 4

_path = click.Path(path_type=Path)
_existing_file = click.Path(exists=True, dir_okay=False, path_type=Path)
_existing_dir = click.Path(exists=True, file_okay=False, path_type=Path)


def handle_errors(f):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (FormatError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)
        except (ValidationError, PpgError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)

    return wrapper


def emit_scalar(value: float, as_json: bool, key: str) -> None:
    if as_json:
        click.echo(json.dumps({key: value}))
    else:
        click.echo(f"{value:.6f}")


def parse_frame_range(text: str | None, num_frames: int) -> tuple[int, int]:
    """Half-open start:end syntax; the full range when omitted."""
    if text is None:
        return 0, num_frames
    pieces = text.split(":")
    if len(pieces) != 2:
        raise click.BadParameter(f"expected start:end, got {text!r}")
    try:
        return int(pieces[0]), int(pieces[1])
    except ValueError:
        raise click.BadParameter(f"expected integers in start:end, got {text!r}")


def load_phoneme_set(path: Path | None) -> PhonemeSet:
    if path is None:
        return canonical_phoneme_set()
    labels = []
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            labels.append(line)
    return PhonemeSet(tuple(labels))


@click.group()
def main():
    """Store, compare, and edit phonetic posteriorgrams."""


@main.command()
@click.argument("ppg_a", type=_existing_file)
@click.argument("ppg_b", type=_existing_file)
@click.option(
    "--similarity",
    "similarity_path",
    type=_existing_file,
    default=None,
    help="Similarity sidecar; identity mapping (plain divergence) when omitted.",
)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True,
              help="Similarity sharpening exponent.")
@click.option("--curve", "curve_path", type=_path, default=None,
              help="Write the per-frame distance curve to this TSV.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON object.")
@handle_errors
def distance(ppg_a, ppg_b, similarity_path, gamma, curve_path, as_json):
    """Pronunciation distance between two aligned posteriorgrams."""
    a = load_ppg(ppg_a)
    b = load_ppg(ppg_b)
    similarity = load_similarity(similarity_path) if similarity_path else None
    config = DistanceConfig(gamma=gamma, similarity=similarity)
    result = utterance_distance(a, b, config)
    if curve_path is not None:
        lines = ["# frame\ttime_sec\tdistance"]
        for t, value in enumerate(result.curve):
            lines.append(f"{t}\t{t * a.hop_seconds:.6f}\t{value!r}")
        Path(curve_path).write_text("\n".join(lines) + "\n")
    if as_json:
        click.echo(json.dumps({"mean": result.mean, "curve": result.curve.tolist()}))
    else:
        click.echo(f"{result.mean:.6f}")


@main.command()
@click.argument("align_dir", type=_existing_dir)
@click.argument("output", type=_path)
@click.option("--hop", type=float, default=0.01, show_default=True,
              help="Rasterization hop in seconds.")
@click.option("--phoneme-set", "phoneme_set_path", type=_existing_file, default=None,
              help="Label file, one phoneme per line; canonical set when omitted.")
@handle_errors
def weights(align_dir, output, hop, phoneme_set_path):
    """Class weights from a directory of .align files."""
    pset = load_phoneme_set(phoneme_set_path)
    files = sorted(align_dir.glob("*.align"))
    if not files:
        raise FormatError(f"no .align files found in {align_dir}")
    all_labels = []
    for path in files:
        alignment = read_alignment(path.read_text(), pset)
        num_frames = alignment_frame_count(alignment, hop)
        all_labels.append(alignment_to_frame_labels(alignment, hop, num_frames, pset))
    save_class_weights(compute_class_weights(all_labels, pset), output)


@main.command()
@click.argument("ppg_dir", type=_existing_dir)
@click.argument("weights_file", type=_existing_file)
@click.argument("output", type=_path)
@handle_errors
def similarity(ppg_dir, weights_file, output):
    """Phoneme similarity matrix from a directory of .ppg files."""
    class_weights = load_class_weights(weights_file)
    files = sorted(ppg_dir.glob("*.ppg"))
    if not files:
        raise FormatError(f"no .ppg files found in {ppg_dir}")
    save_similarity(
        compute_similarity((load_ppg(path) for path in files), class_weights),
        output,
    )


@main.command()
@click.argument("ppg_a", type=_existing_file)
@click.argument("ppg_b", type=_existing_file)
@click.option("-o", "--output", type=_path, required=True)
@click.option("--t", "t", type=float, default=0.5, show_default=True,
              help="Interpolation weight: 0 returns the first input, 1 the second.")
@click.option("--range", "frame_range", default=None,
              help="Half-open start:end frame range; the full range when omitted.")
@handle_errors
def interpolate(ppg_a, ppg_b, output, t, frame_range):
    """Spherically interpolate two aligned posteriorgrams."""
    a = load_ppg(ppg_a)
    b = load_ppg(ppg_b)
    span = parse_frame_range(frame_range, a.num_frames)
    save_ppg(interpolate_region(a, b, span, t), output)


@main.command()
@click.argument("input_ppg", type=_existing_file)
@click.argument("rules_file", type=_existing_file)
@click.option("-o", "--output", type=_path, required=True)
@click.option("--report", "report_path", type=_path, default=None,
              help="Write the edit report JSON here instead of stdout.")
@handle_errors
def edit(input_ppg, rules_file, output, report_path):
    """Apply substitution rules to a posteriorgram's argmax runs."""
    ppg = load_ppg(input_ppg)
    rules = compile_rules(rules_file.read_text(), ppg.phoneme_set)
    edited, report = apply_rules(ppg, rules)
    save_ppg(edited, output)
    payload = json.dumps(report.to_dict(), indent=2)
    if report_path is not None:
        report_path.write_text(payload + "\n")
    else:
        click.echo(payload)


@main.command()
@click.argument("ppg_file", type=_existing_file)
@click.argument("align_file", type=_existing_file)
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON object.")
@handle_errors
def accuracy(ppg_file, align_file, as_json):
    """Framewise phoneme accuracy of a posteriorgram against an alignment."""
    ppg = load_ppg(ppg_file)
    alignment = read_alignment(align_file.read_text(), ppg.phoneme_set)
    truth = alignment_to_frame_labels(
        alignment, ppg.hop_seconds, ppg.num_frames, ppg.phoneme_set
    )
    emit_scalar(framewise_accuracy(ppg, truth), as_json, "accuracy")


@main.command("pitch-error")
@click.argument("pitch_a", type=_existing_file)
@click.argument("pitch_b", type=_existing_file)
@click.option("--threshold", type=float, default=PERIODICITY_THRESHOLD,
              show_default=True, help="Periodicity above which a frame is voiced.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON object.")
@handle_errors
def pitch_error(pitch_a, pitch_b, threshold, as_json):
    """Mean pitch error in cents over jointly voiced frames."""
    a = read_pitch(pitch_a.read_text())
    b = read_pitch(pitch_b.read_text())
    emit_scalar(delta_cents(a, b, threshold), as_json, "delta_cents")


@main.command()
@click.argument("manifest", type=_existing_file)
@click.option("--grid", default="0.8,1.0,1.2,1.5", show_default=True,
              help="Comma-separated gamma candidates.")
@click.option("--similarity", "similarity_path", type=_existing_file, default=None,
              help="Similarity sidecar; identity mapping when omitted.")
@click.option("--json", "as_json", is_flag=True, help="Emit a JSON object.")
@handle_errors
def tune(manifest, grid, similarity_path, as_json):
    """Pick the gamma whose distances best correlate with WER.

    MANIFEST is a TSV of "ppg_a<TAB>ppg_b<TAB>wer" rows, paths relative to
    the manifest; '#' starts a comment.
    """
    try:
        candidates = [float(piece) for piece in grid.split(",") if piece.strip()]
    except ValueError:
        raise click.BadParameter(f"bad --grid value {grid!r}")
    items = []
    base = manifest.parent
    for number, raw in enumerate(manifest.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(
                f"{manifest}:{number}: expected 'ppg_a<TAB>ppg_b<TAB>wer'"
            )
        items.append(
            (load_ppg(base / parts[0]), load_ppg(base / parts[1]), float(parts[2]))
        )
    similarity = load_similarity(similarity_path) if similarity_path else None
    best_gamma, correlation = tune_gamma(items, candidates, similarity)
    if as_json:
        click.echo(json.dumps({"gamma": best_gamma, "correlation": correlation}))
    else:
        click.echo(f"{best_gamma:.6f}\t{correlation:.6f}")


@main.command()
@click.argument("input_path", type=_existing_file)
@click.argument("output_path", type=_path)
@handle_errors
def convert(input_path, output_path):
    """Convert between the binary .ppg container and its JSON encoding."""
    known = {".ppg", ".json"}
    for path in (input_path, output_path):
        if path.suffix.lower() not in known:
            raise click.BadParameter(
                f"unsupported extension {path.suffix!r} on {path} "
                f"(expected .ppg or .json)"
            )
    save_ppg(load_ppg(input_path), output_path)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True, envvar="PPG_PORT")
@click.option("--data-dir", type=_path, default=None, envvar="PPG_DATA_DIR",
              help="Persist documents to this directory and reload them on start.")
@click.option("--ui-dir", type=_existing_dir, default=None,
              help="Serve a built editor UI from this directory.")
def serve(host, port, data_dir, ui_dir):
    """Run the HTTP editing service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(data_dir=data_dir, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    main()
