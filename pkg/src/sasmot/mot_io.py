"""MOTChallenge text I/O, embedding sidecars, and flat-file run configuration.

Row format is the comma-separated MOTChallenge convention::

    frame,id,bb_left,bb_top,bb_width,bb_height,conf,-1,-1,-1

with pixel coordinates. Files written here carry a ``# image_size=WxH``
header so they can be normalized back to unit coordinates without external
context; a caller-supplied image size overrides the header. Embeddings ride
in a sidecar CSV (``frame,det_index,e_1,...,e_D``, 9 significant digits)
keyed by position within the frame, because MOT rows cannot carry vectors.

Run configuration is a flat ``key = value`` text format with ``#`` comments
and dotted keys for nesting (``memory.epsilon = 0.1``), trivially parseable
from any language.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import Box2D
from .memory import MemoryConfig, MemoryPolicy
from .simulator import Scenario, ScenarioConfig
from .tracker import Detection, FrameResult, TrackerConfig

__all__ = [
    "MotRow",
    "ParsedMot",
    "RunConfig",
    "parse_image_size",
    "parse_mot_text",
    "parse_mot_file",
    "write_mot_file",
    "mot_row_to_box",
    "box_to_mot_fields",
    "frames_to_id_boxes",
    "scenario_gt_rows",
    "scenario_det_rows",
    "results_to_rows",
    "write_embeddings_csv",
    "read_embeddings_csv",
    "detections_from_files",
    "write_scenario",
    "parse_flat_config",
    "apply_flat_config",
]


@dataclass(frozen=True)
class MotRow:
    """One MOTChallenge row; box fields are pixels."""

    frame: int
    track_id: int
    bb_left: float
    bb_top: float
    bb_width: float
    bb_height: float
    conf: float

    def __post_init__(self):
        if self.frame < 1:
            raise ValueError(f"frame must be >= 1, got {self.frame}")
        if self.bb_width <= 0:
            raise ValueError(f"non-positive width {self.bb_width}")
        if self.bb_height <= 0:
            raise ValueError(f"non-positive height {self.bb_height}")


@dataclass(eq=False)
class ParsedMot:
    """Rows grouped by frame (ascending) plus the resolved image size."""

    frames: Dict[int, List[MotRow]]
    image_size: Tuple[int, int]

    @property
    def max_frame(self) -> int:
        return max(self.frames) if self.frames else 0


def parse_image_size(text: str) -> Tuple[int, int]:
    """Parse ``WxH`` into a pair of positive ints."""
    parts = text.lower().split("x")
    try:
        w, h = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise ValueError(f"image size must look like 1920x1080, got {text!r}") from None
    if w <= 0 or h <= 0:
        raise ValueError(f"image size must be positive, got {text!r}")
    return w, h


def parse_mot_text(text: str, image_size: Optional[Tuple[int, int]] = None) -> ParsedMot:
    """Parse MOT rows from text; image size comes from the argument or header."""
    header_size: Optional[Tuple[int, int]] = None
    frames: Dict[int, List[MotRow]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("image_size"):
                _, _, value = body.partition("=")
                header_size = parse_image_size(value.strip())
            continue
        parts = line.split(",")
        if len(parts) != 10:
            raise ValueError(f"line {lineno}: expected 10 fields, got {len(parts)}")
        try:
            frame = int(parts[0])
            track_id = int(parts[1])
            numbers = [float(p) for p in parts[2:7]]
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in {line!r}") from None
        try:
            row = MotRow(frame, track_id, *numbers)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        frames.setdefault(frame, []).append(row)

    size = image_size if image_size is not None else header_size
    if size is None:
        raise ValueError("no image size: pass one or include an image_size header")
    return ParsedMot(dict(sorted(frames.items())), size)


def parse_mot_file(path: Path | str, image_size: Optional[Tuple[int, int]] = None) -> ParsedMot:
    return parse_mot_text(Path(path).read_text(), image_size)


def mot_row_to_box(row: MotRow, image_size: Tuple[int, int]) -> Box2D:
    """Pixel row to normalized center/size box: x by width, y by height."""
    w_img, h_img = image_size
    return Box2D(
        cx=(row.bb_left + row.bb_width / 2.0) / w_img,
        cy=(row.bb_top + row.bb_height / 2.0) / h_img,
        w=row.bb_width / w_img,
        h=row.bb_height / h_img,
    )


def box_to_mot_fields(box: Box2D, image_size: Tuple[int, int]) -> Tuple[float, float, float, float]:
    """Normalized box back to pixel (left, top, width, height)."""
    w_img, h_img = image_size
    return (
        (box.cx - box.w / 2.0) * w_img,
        (box.cy - box.h / 2.0) * h_img,
        box.w * w_img,
        box.h * h_img,
    )


def _format_row(row: MotRow) -> str:
    return (
        f"{row.frame},{row.track_id},{row.bb_left:.6f},{row.bb_top:.6f},"
        f"{row.bb_width:.6f},{row.bb_height:.6f},{row.conf:.6f},-1,-1,-1"
    )


def write_mot_file(
    path: Path | str,
    rows: Iterable[MotRow],
    image_size: Tuple[int, int],
    header: bool = True,
) -> None:
    """Write rows sorted by (frame, id) with an image-size header."""
    ordered = sorted(rows, key=lambda r: (r.frame, r.track_id))
    lines = []
    if header:
        lines.append(f"# image_size={image_size[0]}x{image_size[1]}")
    lines.extend(_format_row(r) for r in ordered)
    Path(path).write_text("\n".join(lines) + "\n")


def frames_to_id_boxes(parsed: ParsedMot, n_frames: Optional[int] = None) -> List[List[Tuple[int, Box2D]]]:
    """Per-frame (id, normalized box) lists for frames 1..n (missing = empty)."""
    last = n_frames if n_frames is not None else parsed.max_frame
    out: List[List[Tuple[int, Box2D]]] = []
    for frame in range(1, last + 1):
        rows = parsed.frames.get(frame, [])
        out.append([(r.track_id, mot_row_to_box(r, parsed.image_size)) for r in rows])
    return out


def scenario_gt_rows(scenario: Scenario, image_size: Tuple[int, int]) -> List[MotRow]:
    rows = []
    for frame_idx, entries in enumerate(scenario.gt, start=1):
        for obj_id, box in entries:
            left, top, w, h = box_to_mot_fields(box, image_size)
            rows.append(MotRow(frame_idx, obj_id, left, top, w, h, 1.0))
    return rows


def scenario_det_rows(scenario: Scenario, image_size: Tuple[int, int]) -> List[MotRow]:
    rows = []
    for frame_idx, dets in enumerate(scenario.detections, start=1):
        for det in dets:
            left, top, w, h = box_to_mot_fields(det.box, image_size)
            rows.append(MotRow(frame_idx, -1, left, top, w, h, det.score))
    return rows


def results_to_rows(results: Sequence[FrameResult], image_size: Tuple[int, int]) -> List[MotRow]:
    rows = []
    for result in results:
        for track_id, box in result.tracks:
            left, top, w, h = box_to_mot_fields(box, image_size)
            rows.append(MotRow(result.frame_idx, track_id, left, top, w, h, 1.0))
    return rows


def write_embeddings_csv(path: Path | str, scenario: Scenario) -> None:
    """Sidecar: one `frame,det_index,e_1,...,e_D` line per detection."""
    lines = []
    for frame_idx, dets in enumerate(scenario.detections, start=1):
        for det_index, det in enumerate(dets):
            values = ",".join(f"{v:.9g}" for v in det.embedding)
            lines.append(f"{frame_idx},{det_index},{values}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_embeddings_csv(path: Path | str) -> Dict[Tuple[int, int], np.ndarray]:
    """Sidecar rows keyed by (frame, det_index)."""
    out: Dict[Tuple[int, int], np.ndarray] = {}
    dim: Optional[int] = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 3:
            raise ValueError(f"line {lineno}: embedding row needs frame,det_index,values")
        try:
            frame = int(parts[0])
            det_index = int(parts[1])
            values = np.array([float(p) for p in parts[2:]], dtype=float)
        except ValueError:
            raise ValueError(f"line {lineno}: non-numeric field in embeddings file") from None
        if dim is None:
            dim = values.size
        elif values.size != dim:
            raise ValueError(f"line {lineno}: embedding dim {values.size} != {dim}")
        if (frame, det_index) in out:
            raise ValueError(f"line {lineno}: duplicate key ({frame}, {det_index})")
        out[(frame, det_index)] = values
    return out


def detections_from_files(
    det_path: Path | str,
    emb_path: Path | str,
    image_size: Optional[Tuple[int, int]] = None,
) -> List[List[Detection]]:
    """Join a detection file with its embedding sidecar, per frame 1..max."""
    parsed = parse_mot_file(det_path, image_size)
    embeddings = read_embeddings_csv(emb_path)
    frames: List[List[Detection]] = []
    for frame in range(1, parsed.max_frame + 1):
        dets = []
        for det_index, row in enumerate(parsed.frames.get(frame, [])):
            key = (frame, det_index)
            if key not in embeddings:
                raise ValueError(f"missing embedding for frame {frame} detection {det_index}")
            box = mot_row_to_box(row, parsed.image_size)
            dets.append(Detection(box, embeddings[key], row.conf))
        frames.append(dets)
    return frames


def write_scenario(
    scenario: Scenario, out_dir: Path | str, image_size: Tuple[int, int]
) -> Tuple[Path, Path, Path]:
    """Write gt.txt, det.txt, and embeddings.csv into a directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gt_path = out / "gt.txt"
    det_path = out / "det.txt"
    emb_path = out / "embeddings.csv"
    write_mot_file(gt_path, scenario_gt_rows(scenario, image_size), image_size)
    write_mot_file(det_path, scenario_det_rows(scenario, image_size), image_size)
    write_embeddings_csv(emb_path, scenario)
    return gt_path, det_path, emb_path


@dataclass
class RunConfig:
    """Everything one experiment run needs."""

    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    policy: MemoryPolicy = MemoryPolicy.SPARSE_OFS
    output_dir: Optional[Path] = None
    n_seeds: int = 5

    def __post_init__(self):
        if self.n_seeds < 1:
            raise ValueError(f"n_seeds must be >= 1, got {self.n_seeds}")


def parse_flat_config(text: str) -> Dict[str, str]:
    """Flat `key = value` lines; `#` comments; later keys override earlier."""
    items: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected key = value, got {line!r}")
        items[key.strip()] = value.partition("#")[0].strip()
    return items


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _coerce(value: str, target_type: type, key: str):
    if target_type is bool:
        lowered = value.lower()
        if lowered not in _BOOL_VALUES:
            raise ValueError(f"{key}: expected a boolean, got {value!r}")
        return _BOOL_VALUES[lowered]
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    return value


def _apply_to_dataclass(obj, dotted: str, key: str, value: str):
    field_types = {f.name: f.type for f in dataclasses.fields(obj)}
    if key not in field_types:
        raise ValueError(f"unknown config key {dotted!r}")
    current = getattr(obj, key)
    target_type = type(current) if current is not None else str
    try:
        coerced = _coerce(value, target_type, dotted)
    except ValueError as exc:
        raise ValueError(f"{dotted}: {exc}") from None
    return dataclasses.replace(obj, **{key: coerced})


def apply_flat_config(run: RunConfig, items: Dict[str, str]) -> RunConfig:
    """Apply dotted config keys onto a RunConfig, re-validating each dataclass."""
    scenario = run.scenario
    tracker = run.tracker
    memory = run.tracker.memory
    policy = run.policy
    output_dir = run.output_dir
    n_seeds = run.n_seeds
    seed_override: Optional[int] = None

    for dotted, value in items.items():
        section, _, key = dotted.partition(".")
        if dotted == "policy":
            try:
                policy = MemoryPolicy(value)
            except ValueError:
                names = ", ".join(p.value for p in MemoryPolicy)
                raise ValueError(f"policy must be one of {names}, got {value!r}") from None
        elif dotted == "output_dir":
            output_dir = Path(value)
        elif dotted == "n_seeds":
            n_seeds = int(value)
        elif dotted == "seed":
            seed_override = int(value)
        elif section == "scenario" and key:
            scenario = _apply_to_dataclass(scenario, dotted, key, value)
        elif section == "memory" and key:
            memory = _apply_to_dataclass(memory, dotted, key, value)
        elif section == "tracker" and key:
            if key == "memory":
                raise ValueError("set memory fields via memory.<field>")
            tracker = _apply_to_dataclass(tracker, dotted, key, value)
        else:
            raise ValueError(f"unknown config key {dotted!r}")

    if seed_override is not None:
        scenario = dataclasses.replace(scenario, seed=seed_override)
    tracker = dataclasses.replace(tracker, memory=memory)
    return RunConfig(scenario, tracker, policy, output_dir, n_seeds)
