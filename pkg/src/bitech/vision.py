"""Seven-segment set-point recognition.

Pipeline: contrast stretch -> Otsu threshold -> erosion -> connected
regions -> per-region segment probing -> template comparison. Digits are
matched as 7-bit segment codes (segments A..G: top, top-right,
bottom-right, bottom, bottom-left, top-left, middle), which keeps matching
font-independent and exactly testable. A deterministic rasterizer of the
same segment geometry doubles as the pipeline's round-trip oracle and as a
PGM fixture generator.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


SETPOINT_MIN = 16
SETPOINT_MAX = 30

# fraction pairs are (x0, x1, y0, y1) relative to the probed box
_PROBE_ZONES = {
    "A": (0.30, 0.70, 0.00, 0.20),
    "B": (0.80, 1.00, 0.15, 0.45),
    "C": (0.80, 1.00, 0.55, 0.85),
    "D": (0.30, 0.70, 0.80, 1.00),
    "E": (0.00, 0.20, 0.55, 0.85),
    "F": (0.00, 0.20, 0.15, 0.45),
    "G": (0.30, 0.70, 0.40, 0.60),
}
_SEGMENT_ORDER = "ABCDEFG"

# segment truth table for digits 0-9, order A..G
TEMPLATES = {
    0: (1, 1, 1, 1, 1, 1, 0),
    1: (0, 1, 1, 0, 0, 0, 0),
    2: (1, 1, 0, 1, 1, 0, 1),
    3: (1, 1, 1, 1, 0, 0, 1),
    4: (0, 1, 1, 0, 0, 1, 1),
    5: (1, 0, 1, 1, 0, 1, 1),
    6: (1, 0, 1, 1, 1, 1, 1),
    7: (1, 1, 1, 0, 0, 0, 0),
    8: (1, 1, 1, 1, 1, 1, 1),
    9: (1, 1, 1, 1, 0, 1, 1),
}

PERCENTILE_LOW = 2.0
PERCENTILE_HIGH = 98.0
ZONE_ON_FRACTION = 0.30
MIN_REGION_AREA_FRACTION = 0.005
NARROW_ASPECT = 0.45          # below this, probe a right-aligned virtual digit box
ERODE_MASS_GUARD = 0.5        # skip pipeline erosion when it eats half the foreground
REJECT_DISTANCE = 2


class VisionError(Exception):
    pass


class DegenerateImage(VisionError):
    """Histogram collapses to a single bin; no threshold exists."""


class Unrecognized(VisionError):
    """No template within the accepted Hamming distance, or a tie."""


class NoDigits(VisionError):
    """No candidate regions survive filtering."""


class OutOfRange(VisionError):
    """Recognized integer falls outside the accepted set-point range."""

    def __init__(self, value):
        super().__init__(f"set-point {value} outside [{SETPOINT_MIN}, {SETPOINT_MAX}]")
        self.value = value


class InvalidText(VisionError):
    pass


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image; pixels shaped (height, width), dtype uint8."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be a nonempty 2-D array")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryImage:
    """Boolean foreground mask with the source image's shape."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2:
            raise ValueError("mask must be 2-D")
        object.__setattr__(self, "bits", b)

    @property
    def width(self):
        return self.bits.shape[1]

    @property
    def height(self):
        return self.bits.shape[0]


@dataclass(frozen=True)
class Region:
    """Connected component: bbox in (x, y, w, h) pixel coordinates."""

    bbox: tuple
    pixel_count: int
    component_id: int


@dataclass(frozen=True)
class SegmentSignature:
    """ON/OFF state of segments A..G."""

    segments: tuple

    def __post_init__(self):
        if len(self.segments) != 7 or any(s not in (0, 1, True, False) for s in self.segments):
            raise ValueError("signature must be seven booleans")
        object.__setattr__(self, "segments", tuple(bool(s) for s in self.segments))

    @property
    def code(self):
        bits = 0
        for s in self.segments:
            bits = (bits << 1) | int(s)
        return bits


@dataclass(frozen=True)
class RecognitionResult:
    text: str
    per_digit_confidence: tuple
    setpoint: int


def enhance_contrast(img: GrayImage) -> GrayImage:
    """Linear stretch mapping the 2nd percentile to 0 and the 98th to 255."""
    px = img.pixels.astype(np.float64)
    lo = np.percentile(px, PERCENTILE_LOW)
    hi = np.percentile(px, PERCENTILE_HIGH)
    if hi <= lo:
        return img
    out = np.clip((px - lo) * (255.0 / (hi - lo)), 0.0, 255.0)
    return GrayImage(np.rint(out).astype(np.uint8))


def binarize(img: GrayImage):
    """Otsu threshold via exhaustive scan of all 256 candidates.

    Returns (BinaryImage, threshold). Foreground is the darker class;
    polarity flips automatically when that class covers more than half the
    image. Ties in between-class variance resolve to the lowest threshold.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateImage("single-bin histogram")
    n = hist.sum()
    idx = np.arange(256, dtype=np.float64)
    cum_n = np.cumsum(hist)
    cum_ix = np.cumsum(hist * idx)
    w0 = cum_n / n
    w1 = 1.0 - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = cum_ix / cum_n
        mu1 = (cum_ix[-1] - cum_ix) / (n - cum_n)
    var = w0 * w1 * (mu0 - mu1) ** 2
    var[~np.isfinite(var)] = -1.0
    threshold = int(np.argmax(var))
    mask = img.pixels <= threshold
    if mask.mean() > 0.5:
        mask = ~mask
    return BinaryImage(mask), threshold


def erode(img: BinaryImage, iterations: int) -> BinaryImage:
    """3x3 full-kernel erosion, `iterations` passes; borders erode inward."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    bits = img.bits
    for _ in range(iterations):
        padded = np.pad(bits, 1, constant_values=False)
        out = padded[1:-1, 1:-1].copy()
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                out &= padded[1 + dy:padded.shape[0] - 1 + dy,
                              1 + dx:padded.shape[1] - 1 + dx]
        bits = out
    return BinaryImage(bits)


def extract_regions(img: BinaryImage):
    """4-connected components above the minimum-area filter, left to right."""
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    labels, count = ndimage.label(img.bits, structure=structure)
    min_area = MIN_REGION_AREA_FRACTION * img.bits.size
    regions = []
    for comp_id, slc in enumerate(ndimage.find_objects(labels), start=1):
        if slc is None:
            continue
        pixel_count = int(np.count_nonzero(labels[slc] == comp_id))
        if pixel_count < min_area:
            continue
        ys, xs = slc
        regions.append(Region(
            bbox=(xs.start, ys.start, xs.stop - xs.start, ys.stop - ys.start),
            pixel_count=pixel_count,
            component_id=comp_id,
        ))
    regions.sort(key=lambda r: r.bbox[0])
    return regions


def digit_signature(img: BinaryImage, region: Region) -> SegmentSignature:
    """Probe the seven canonical zones inside the region's bounding box.

    A zone reads ON when at least 30% of it is foreground. Bar-shaped
    regions (aspect below 0.45, the glyph "1") carry no horizontal
    geometry, so the zones are laid over a virtual full-digit box
    right-aligned to the region.
    """
    x, y, w, h = region.bbox
    if x < 0 or y < 0 or x + w > img.width or y + h > img.height:
        raise ValueError("region outside image")
    box_x, box_w = x, w
    if h > 0 and w / h < NARROW_ASPECT:
        box_w = max(w, int(round(0.6 * h)))
        box_x = x + w - box_w
    sub = np.zeros((h, box_w), dtype=bool)
    src_x0 = max(box_x, 0)
    sub[:, src_x0 - box_x:box_x + box_w - box_x] = img.bits[y:y + h, src_x0:box_x + box_w]
    states = []
    for name in _SEGMENT_ORDER:
        fx0, fx1, fy0, fy1 = _PROBE_ZONES[name]
        x0 = int(round(fx0 * box_w))
        x1 = max(x0 + 1, int(round(fx1 * box_w)))
        y0 = int(round(fy0 * h))
        y1 = max(y0 + 1, int(round(fy1 * h)))
        zone = sub[y0:y1, x0:x1]
        states.append(zone.mean() >= ZONE_ON_FRACTION if zone.size else False)
    return SegmentSignature(tuple(states))


def classify_digit(sig: SegmentSignature):
    """Nearest template by Hamming distance over the 7 segment bits.

    Returns (digit, confidence) with confidence = 1 - distance/7. Rejects
    when the best distance reaches 2 or when two templates tie.
    """
    distances = {}
    for digit, template in TEMPLATES.items():
        distances[digit] = sum(int(a) != b for a, b in zip(sig.segments, template))
    best = min(distances.values())
    winners = [d for d, dist in distances.items() if dist == best]
    if best >= REJECT_DISTANCE or len(winners) != 1:
        raise Unrecognized(f"distance {best}, candidates {winners}")
    return winners[0], 1.0 - best / 7.0


def recognize_setpoint(img: GrayImage) -> RecognitionResult:
    """Run the full pipeline and accept integers in [16, 30].

    The erosion stage is guarded: when one pass removes at least half of
    the foreground mass (thin strokes), the un-eroded mask is used so the
    denoising step cannot destroy the glyphs it is meant to clean.
    """
    enhanced = enhance_contrast(img)
    try:
        mask, _ = binarize(enhanced)
    except DegenerateImage:
        raise NoDigits("blank image")
    eroded = erode(mask, 1)
    before = int(np.count_nonzero(mask.bits))
    after = int(np.count_nonzero(eroded.bits))
    if before > 0 and after >= ERODE_MASS_GUARD * before:
        mask = eroded
    regions = extract_regions(mask)
    if not regions:
        raise NoDigits("no regions above the area filter")
    digits = []
    confidences = []
    for region in regions:
        digit, conf = classify_digit(digit_signature(mask, region))
        digits.append(str(digit))
        confidences.append(conf)
    text = "".join(digits)
    value = int(text)
    if not SETPOINT_MIN <= value <= SETPOINT_MAX:
        raise OutOfRange(value)
    return RecognitionResult(text=text, per_digit_confidence=tuple(confidences),
                             setpoint=value)


def render_digits(text, stroke=4, height=24, margin=6, spacing=6,
                  foreground=30, background=220) -> GrayImage:
    """Deterministic dark-on-light seven-segment rasterization.

    Segment rectangles overlap at the joints so every glyph is a single
    4-connected component. Identical arguments produce identical images.
    """
    if not text or not text.isdigit():
        raise InvalidText(f"not a digit string: {text!r}")
    if stroke < 1 or height < 5 * stroke or margin < 0 or spacing < 0:
        raise ValueError("degenerate glyph geometry")
    cell_w = int(round(0.6 * height))
    img_h = height + 2 * margin
    img_w = 2 * margin + len(text) * cell_w + (len(text) - 1) * spacing
    canvas = np.full((img_h, img_w), background, dtype=np.uint8)
    half = height // 2
    mid_y0 = (height - stroke) // 2
    seg_rects = {
        "A": (0, cell_w, 0, stroke),
        "G": (0, cell_w, mid_y0, mid_y0 + stroke),
        "D": (0, cell_w, height - stroke, height),
        "F": (0, stroke, 0, half),
        "B": (cell_w - stroke, cell_w, 0, half),
        "E": (0, stroke, half, height),
        "C": (cell_w - stroke, cell_w, half, height),
    }
    for i, ch in enumerate(text):
        ox = margin + i * (cell_w + spacing)
        template = TEMPLATES[int(ch)]
        for name, on in zip(_SEGMENT_ORDER, template):
            if not on:
                continue
            x0, x1, y0, y1 = seg_rects[name]
            canvas[margin + y0:margin + y1, ox + x0:ox + x1] = foreground
    return GrayImage(canvas)


def signature_for_digit(digit: int) -> SegmentSignature:
    """Template signature of a digit, for tests and tooling."""
    return SegmentSignature(TEMPLATES[digit])


def read_pgm(path) -> GrayImage:
    """Read a binary 8-bit PGM (P5) file bit-exactly."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise VisionError("truncated PGM header")
        c = data[i:i + 1]
        if c == b"#":
            while i < len(data) and data[i:i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j:j + 1].isspace():
                j += 1
            tokens.append(data[i:j])
            i = j
    if tokens[0] != b"P5":
        raise VisionError(f"not a binary PGM: magic {tokens[0]!r}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise VisionError(f"only 8-bit PGM supported, maxval {maxval}")
    i += 1  # single whitespace after maxval
    raster = data[i:i + width * height]
    if len(raster) != width * height:
        raise VisionError("truncated PGM raster")
    return GrayImage(np.frombuffer(raster, dtype=np.uint8).reshape(height, width))


def write_pgm(img: GrayImage, path):
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
        fh.write(img.pixels.tobytes())
