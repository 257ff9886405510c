"""Synthetic observation-text corpus: generation, CSV persistence, splitting."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import CorpusError, CorpusParseError, InvalidInputError
from .quantization import QuantizationScheme, quantize

SPLITS = ("train", "val", "test")
DOMAIN_TAGS = ("in_domain", "ood")
CSV_HEADER = "level_ratio,text,split,domain_tag"

# Split proportions implied by the reference dataset's 1882/205/289 usage.
DEFAULT_FRACTIONS = (0.792, 0.086, 0.122)


@dataclass(frozen=True)
class ObservationRecord:
    level_ratio: float
    text: str
    split: str
    domain_tag: str

    def __post_init__(self):
        if not 0.0 <= self.level_ratio <= 1.0:
            raise InvalidInputError(f"level_ratio {self.level_ratio!r} outside [0, 1]")
        if not self.text:
            raise InvalidInputError("text must be nonempty")
        if self.split not in SPLITS:
            raise InvalidInputError(f"unknown split {self.split!r}")
        if self.domain_tag not in DOMAIN_TAGS:
            raise InvalidInputError(f"unknown domain_tag {self.domain_tag!r}")


@dataclass(frozen=True)
class Corpus:
    records: tuple

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    @property
    def level_grid(self) -> list[float]:
        return sorted({r.level_ratio for r in self.records})

    def in_split(self, split: str) -> list[ObservationRecord]:
        return [r for r in self.records if r.split == split]

    def split_sizes(self) -> dict:
        sizes = {s: 0 for s in SPLITS}
        for r in self.records:
            sizes[r.split] += 1
        return sizes


def label_of(record: ObservationRecord, scheme: QuantizationScheme) -> int:
    """Quantization label for a record's level ratio mapped linearly onto the range."""
    level = record.level_ratio * (scheme.hi - scheme.lo) + scheme.lo
    return quantize(scheme, level)


# ---------------------------------------------------------------------------
# Generation

_RIVER = ("river", "canal", "stream", "waterway")
_PRETTY = ("pretty", "quite", "really", "fairly")
_VERY = ("really", "very", "super", "so")

_BAND_TEMPLATES = (
    # near empty
    (
        "There's barely any water out here.",
        "The {river} is almost completely dry.",
        "Hardly any water left in the {river}.",
        "The {river}bed is showing, barely a trickle.",
        "Just a thin trickle running through.",
        "The {river} looks empty, mostly mud and stones.",
        "You could walk across, it's basically dry.",
        "Almost no water flowing at all.",
        "Bone dry stretches along the {river} again.",
        "A few puddles where the {river} used to be.",
    ),
    # low
    (
        "The water is {pretty} low today.",
        "The {river}'s flowing {very} gently.",
        "Less water than usual out here.",
        "The {river} is on the shallow side.",
        "Flow is weak and the level looks low.",
        "The water sits well below the banks.",
        "It's a calm, low {river} this morning.",
        "Noticeably low water under the bridge.",
        "The {river} is running thin but steady.",
        "Shallow enough to see the bottom everywhere.",
    ),
    # ordinary
    (
        "The {river} looks about normal today.",
        "The water level seems ordinary.",
        "Flowing steadily, nothing unusual.",
        "The {river} is at its usual height.",
        "A typical day on the {river}.",
        "The water is neither high nor low.",
        "The current looks moderate out here.",
        "Everything looks average at the {river}.",
        "Mid-level flow, same as most days.",
        "The {river} is moving along at a normal pace.",
    ),
    # high
    (
        "The water's {pretty} high... hope it's okay.",
        "The {river} is running high today.",
        "The water has come up {pretty} a lot since yesterday.",
        "The level is higher than usual, watch your step.",
        "Strong current, the {river} looks swollen.",
        "The water is close to the top of the banks.",
        "That's a lot of water moving through right there.",
        "The {river} is up after all that rain.",
        "Fast, heavy flow against the pilings.",
        "The banks are {very} close to going under.",
    ),
    # near flooding
    (
        "Almost flooding... this is scary!",
        "The {river} is about to spill over!",
        "The water is right at the edge of the banks!",
        "Dangerously high water, stay away from the {river}.",
        "It's overflowing in places, be careful out there!",
        "It's past the flood markers, unreal.",
        "Flood-warning levels, the {river} is raging.",
        "The water is over the walkway already!",
        "The whole {river} is surging past the markers.",
        "Evacuation talk going around, the {river} is brimming.",
    ),
)

_PREFIXES = ("", "", "", "Honestly, ", "Heads up: ", "Just walked by, ", "Wow, ")
_SUFFIXES = ("", "", "", " today", " right now", " this morning", " again")

# Alarmed-but-directionless posts, written when the level is extreme either
# way. Text alone cannot tell which extreme, so the honest label posterior
# is bimodal; a single regressed value necessarily averages the two modes.
_EXTREME_TEMPLATES = (
    "Never seen the {river} like this.",
    "The {river} doesn't look right at all.",
    "Whoa, look at the state of the {river}!",
    "This is not a normal day for the {river}.",
    "Can't believe what the {river} looks like right now.",
    "The {river} is acting strange, honestly.",
    "Something's off with the {river}.",
    "Unbelievable conditions on the {river}.",
)

# Level-uninformative posts, written at any water level.
_VAGUE_TEMPLATES = (
    "Out by the {river} again.",
    "Same {river}, different day.",
    "Watching the water go by.",
    "The {river} is doing its thing.",
    "Took my usual walk along the {river}.",
    "Another check on the {river}.",
    "You know how the {river} gets.",
    "Stopped by the {river} for a minute.",
    "Just me and the {river} this evening.",
    "The {river} again, same as ever.",
)

# Dialect-flavored low-water phrases. These deliberately avoid the template
# bank's content vocabulary so their character n-grams are unseen in
# training, which is what makes them out-of-domain for the models.
_OOD_PHRASES = (
    "yon burn's fair wheesht the noo, ken",
    "nae but a wee skoosh doon the cundy",
    "t'beck's nobbut a smidgin, sithee",
    "the cut's gey shilpit th'day, so it is",
    "that thar crick's plumb gaunt, yessir",
    "ol' branch ain't got but a smidge in 'er",
    "the lade's awfy scrimpit the morn",
    "yon sheugh is nigh toom, I'm tellin' ye",
    "the goyt's gone a' nesh an' scanty, like",
    "nowt in t'cut but a lick, tha knows",
    "the leat's fair clemmed, proper scant it is",
    "yon syke's no but a spittle th'morn",
    "crick's lookin' mighty puny down yonder, y'all",
    "the rhyne's gone gey jimp, mind",
    "t'goit's nobbut weetin' its bed, sithee",
    "yon burnie's a' but wheesht, nae mair nor a seep",
)


def _band_of(eff_ratio: float) -> int:
    return min(int(eff_ratio * len(_BAND_TEMPLATES)), len(_BAND_TEMPLATES) - 1)


def _render(template: str, rng: np.random.Generator) -> str:
    return template.format(
        river=_RIVER[rng.integers(len(_RIVER))],
        pretty=_PRETTY[rng.integers(len(_PRETTY))],
        very=_VERY[rng.integers(len(_VERY))],
    )


def default_level_grid() -> list[float]:
    """Level ratios 0..1 in 2% increments."""
    return [i / 50 for i in range(51)]


def generate_corpus(seed: int, levels: list[float] | None = None,
                    texts_per_level: int = 48, boundary_blur: float = 0.03,
                    vague_rate: float = 0.06, extreme_ambiguous_rate: float = 0.3) -> Corpus:
    """Emit template-based texts per level, deterministic in the seed.

    ``boundary_blur`` jitters which phrase band a text is drawn from, so
    levels near a band edge sometimes read like the neighboring band, the
    way human reports do. A ``vague_rate`` share of posts says nothing about
    the level, and an ``extreme_ambiguous_rate`` share of posts at the
    outermost bands is alarmed without saying which extreme. All records
    start in the train split; use ``split_corpus`` to assign real splits.
    """
    if texts_per_level < 3:
        raise InvalidInputError(f"texts_per_level must be >= 3, got {texts_per_level}")
    levels = default_level_grid() if levels is None else sorted(levels)
    rng = np.random.default_rng(seed)
    records = []
    for ratio in levels:
        if not 0.0 <= ratio <= 1.0:
            raise InvalidInputError(f"grid level {ratio!r} outside [0, 1]")
        for _ in range(texts_per_level):
            eff = float(np.clip(ratio + boundary_blur * rng.standard_normal(), 0.0, 1.0))
            band = _band_of(eff)
            if rng.random() < vague_rate:
                bank = _VAGUE_TEMPLATES
            elif band in (0, len(_BAND_TEMPLATES) - 1) and rng.random() < extreme_ambiguous_rate:
                bank = _EXTREME_TEMPLATES
            else:
                bank = _BAND_TEMPLATES[band]
            text = _render(bank[rng.integers(len(bank))], rng)
            if rng.random() < 0.25:
                prefix = _PREFIXES[rng.integers(len(_PREFIXES))]
                if prefix:
                    text = prefix + text[0].lower() + text[1:]
            if rng.random() < 0.3:
                suffix = _SUFFIXES[rng.integers(len(_SUFFIXES))]
                if suffix:
                    text = (text[:-1] + suffix + text[-1]) if text[-1] in ".!?" else text + suffix
            records.append(ObservationRecord(ratio, text, "train", "in_domain"))
    return Corpus(records=tuple(records))


def generate_ood_bank(seed: int = 0, size: int = 16) -> list[str]:
    """Deterministic out-of-domain phrase bank (dialect low-water reports)."""
    rng = np.random.default_rng(seed)
    phrases = list(_OOD_PHRASES)
    order = rng.permutation(len(phrases))
    return [phrases[i] for i in order[:min(size, len(phrases))]]


# ---------------------------------------------------------------------------
# Splitting

def _split_counts(n: int, fractions: tuple[float, float, float]) -> list[int]:
    base = [math.floor(f * n) for f in fractions]
    remainder = n - sum(base)
    order = sorted(range(3), key=lambda i: (-(fractions[i] * n - base[i]), i))
    for i in order[:remainder]:
        base[i] += 1
    # train and test must be nonempty whenever their fraction is positive
    for protected in (0, 2):
        if fractions[protected] > 0 and base[protected] == 0:
            donor = max(range(3), key=lambda i: base[i])
            if base[donor] <= (1 if fractions[donor] > 0 and donor in (0, 2) else 0):
                raise CorpusError(f"too few records ({n}) to stratify into nonempty splits")
            base[donor] -= 1
            base[protected] += 1
    return base


def split_corpus(corpus: Corpus, fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
                 seed: int = 0) -> Corpus:
    """Assign train/val/test splits stratified by level key."""
    if any(f < 0 for f in fractions) or len(fractions) != 3:
        raise InvalidInputError(f"fractions must be three nonnegative reals, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidInputError(f"fractions must sum to 1, got {sum(fractions)!r}")
    rng = np.random.default_rng(seed)
    by_key: dict = {}
    for idx, rec in enumerate(corpus.records):
        by_key.setdefault(rec.level_ratio, []).append(idx)
    assignment = {}
    for key in sorted(by_key):
        indices = by_key[key]
        order = rng.permutation(len(indices))
        counts = _split_counts(len(indices), fractions)
        cursor = 0
        for split, count in zip(SPLITS, counts):
            for j in order[cursor:cursor + count]:
                assignment[indices[j]] = split
            cursor += count
    records = tuple(replace(rec, split=assignment[i]) for i, rec in enumerate(corpus.records))
    return Corpus(records=records)


# ---------------------------------------------------------------------------
# Persistence (CSV, UTF-8, text field double-quoted)

def save_corpus(corpus: Corpus, path) -> None:
    path = Path(path)
    lines = [CSV_HEADER]
    for rec in corpus.records:
        if "\n" in rec.text or "\r" in rec.text:
            raise CorpusError("texts must not contain line breaks")
        quoted = '"' + rec.text.replace('"', '""') + '"'
        lines.append(f"{rec.level_ratio!r},{quoted},{rec.split},{rec.domain_tag}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_corpus(path) -> Corpus:
    path = Path(path)
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusParseError("empty file", line=1) from None
        if [h.strip() for h in header] != CSV_HEADER.split(","):
            raise CorpusParseError(f"bad header {header!r}", line=1)
        for row in reader:
            if not row:
                continue
            line = reader.line_num
            if len(row) != 4:
                raise CorpusParseError(f"expected 4 fields, got {len(row)}", line=line)
            ratio_text, text, split, tag = row
            try:
                ratio = float(ratio_text)
            except ValueError:
                raise CorpusParseError(f"bad level_ratio {ratio_text!r}", line=line) from None
            try:
                records.append(ObservationRecord(ratio, text, split.strip(), tag.strip()))
            except InvalidInputError as exc:
                raise CorpusParseError(str(exc), line=line) from None
    return Corpus(records=tuple(records))


def save_ood_bank(phrases: list[str], path) -> None:
    Path(path).write_text("\n".join(phrases) + "\n", encoding="utf-8")


def load_ood_bank(path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    phrases = [ln.strip() for ln in lines if ln.strip()]
    if not phrases:
        raise CorpusError(f"OOD bank {path} is empty")
    return phrases


def text_bank(corpus: Corpus, scheme: QuantizationScheme, split: str = "test"):
    """Group a split's in-domain texts by their level value on the scheme's range.

    Returns (ascending level keys, {key: [texts]}); raises if any grid key
    in the corpus has no text in the chosen split.
    """
    if split not in SPLITS:
        raise InvalidInputError(f"unknown split {split!r}")
    span = scheme.hi - scheme.lo
    bank: dict = {}
    for rec in corpus.records:
        if rec.split != split or rec.domain_tag != "in_domain":
            continue
        key = rec.level_ratio * span + scheme.lo
        bank.setdefault(key, []).append(rec.text)
    missing = [r for r in corpus.level_grid if r * span + scheme.lo not in bank]
    if missing:
        raise CorpusError(f"split {split!r} has no texts at {len(missing)} grid level(s)")
    keys = np.array(sorted(bank))
    return keys, bank
