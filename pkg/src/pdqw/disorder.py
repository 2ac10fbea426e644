"""Generation and persistence of per-(step, site) phase maps.

A map for `steps` steps holds one dense row per step; row n covers sites
-n..+n (2n+1 cells, parity-unreachable cells included, they are provably
inert). A fraction p of cells is marked disordered and draws its phase
uniformly from the alphabet (default {0, pi}); every other cell carries
phase 0. Sampling is reproducible: the per-map seed is derived from
(master_seed, map_index) and the draw order is fixed, so regenerating from
the stored header is bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DomainError, MapParseError

DEFAULT_ALPHABET = (0.0, math.pi)
SAMPLING_MODES = ("bernoulli", "exact_fraction")


@dataclass
class DisorderSpec:
    """Everything needed to draw an ensemble of phase maps."""

    p: float
    steps: int
    alphabet: tuple[float, ...] = DEFAULT_ALPHABET
    sampling_mode: str = "bernoulli"
    master_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"dilution p must lie in [0, 1], got {self.p!r}")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.sampling_mode not in SAMPLING_MODES:
            raise DomainError(f"sampling_mode must be one of {SAMPLING_MODES}")
        self.alphabet = tuple(float(a) for a in self.alphabet)
        if len(self.alphabet) == 0:
            raise DomainError("alphabet must be non-empty")
        if not 0 <= int(self.master_seed) < 2**64:
            raise DomainError("master_seed must fit in 64 bits")


@dataclass(eq=False)
class PhaseMap:
    """One disorder realization.

    rows[n-1] holds radians for sites -n..+n of step n. `mask` marks the
    cells that were drawn as disordered; it is in-memory metadata (the file
    format stores phases only) and is excluded from equality.
    """

    steps: int
    rows: tuple[np.ndarray, ...]
    alphabet: tuple[float, ...]
    p_nominal: float
    seed: int
    sampling_mode: str
    mask: tuple[np.ndarray, ...] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.rows = tuple(np.asarray(r, dtype=float) for r in self.rows)
        if len(self.rows) != self.steps:
            raise DomainError(f"expected {self.steps} rows, got {len(self.rows)}")
        for n, row in enumerate(self.rows, start=1):
            if row.shape != (2 * n + 1,):
                raise DomainError(f"row {n} must have {2 * n + 1} entries, got {row.size}")

    @property
    def n_cells(self) -> int:
        return self.steps * self.steps + 2 * self.steps

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseMap):
            return NotImplemented
        return (
            self.steps == other.steps
            and self.p_nominal == other.p_nominal
            and self.seed == other.seed
            and self.sampling_mode == other.sampling_mode
            and self.alphabet == other.alphabet
            and all(np.array_equal(a, b) for a, b in zip(self.rows, other.rows))
        )


def map_seed(master_seed: int, map_index: int) -> int:
    """64-bit seed for map `map_index`, derived deterministically."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(map_index),))
    return int(ss.generate_state(1, np.uint64)[0])


def _row_sizes(steps: int) -> list[int]:
    return [2 * n + 1 for n in range(1, steps + 1)]


def _sample(steps: int, p: float, alphabet: tuple[float, ...], sampling_mode: str, seed: int):
    """Draw (rows, mask) for one map. Draw order is part of the format."""
    rng = np.random.default_rng(seed)
    sizes = _row_sizes(steps)
    total = sum(sizes)
    if sampling_mode == "bernoulli":
        mask_flat = rng.random(total) < p
    else:
        # Floor of p*total on the exact rational value of the float p, so the
        # count never suffers a binary off-by-one.
        count = int(Fraction(p) * total)
        mask_flat = np.zeros(total, dtype=bool)
        if count > 0:
            mask_flat[rng.choice(total, size=count, replace=False)] = True
    choices = rng.integers(0, len(alphabet), size=total)
    values = np.asarray(alphabet, dtype=float)[choices]
    phases_flat = np.where(mask_flat, values, 0.0)
    rows, mask, pos = [], [], 0
    for size in sizes:
        rows.append(phases_flat[pos : pos + size].copy())
        mask.append(mask_flat[pos : pos + size].copy())
        pos += size
    return tuple(rows), tuple(mask)


def generate_phase_map(spec: DisorderSpec, map_index: int) -> PhaseMap:
    """Map number `map_index` of the ensemble described by `spec`."""
    if map_index < 0:
        raise DomainError("map_index must be >= 0")
    seed = map_seed(spec.master_seed, map_index)
    rows, mask = _sample(spec.steps, spec.p, spec.alphabet, spec.sampling_mode, seed)
    return PhaseMap(
        steps=spec.steps,
        rows=rows,
        alphabet=spec.alphabet,
        p_nominal=spec.p,
        seed=seed,
        sampling_mode=spec.sampling_mode,
        mask=mask,
    )


def zero_map(steps: int) -> PhaseMap:
    """The ordered map: every cell phase 0, nothing marked disordered."""
    rows = tuple(np.zeros(s) for s in _row_sizes(steps))
    mask = tuple(np.zeros(s, dtype=bool) for s in _row_sizes(steps))
    return PhaseMap(steps, rows, DEFAULT_ALPHABET, 0.0, 0, "bernoulli", mask)


def realized_fraction(phase_map: PhaseMap) -> float:
    """Fraction of cells marked disordered (not the fraction of nonzero phases:
    a disordered cell may legitimately draw 0)."""
    if phase_map.mask is None:
        raise DomainError(
            "disorder mask unavailable: this map was loaded from a file whose header "
            "does not regenerate its rows, so realized_fraction is undefined"
        )
    marked = sum(int(m.sum()) for m in phase_map.mask)
    return marked / phase_map.n_cells


def _format_pi_units(value_rad: float) -> str:
    units = value_rad / math.pi if value_rad != 0.0 else 0.0
    if units == int(units):
        return str(int(units))
    return repr(units)


def _alphabet_token(value_rad: float) -> str:
    if value_rad == 0.0:
        return "0"
    if value_rad == math.pi:
        return "pi"
    return repr(value_rad / math.pi)


def _parse_alphabet_token(token: str, line: int) -> float:
    if token == "pi":
        return math.pi
    try:
        return float(token) * math.pi
    except ValueError:
        raise MapParseError(f"bad alphabet token {token!r}", line) from None


def save_map(phase_map: PhaseMap, path) -> None:
    """Write the plain-text map format: header lines, then one row per step.

    Row entries are multiples of pi (so the default alphabet serializes as
    0/1). The header is sufficient to regenerate the map, which is how the
    disordered-cell mask survives a round trip.
    """
    lines = [
        f"steps={phase_map.steps}",
        f"p={phase_map.p_nominal!r}",
        f"seed={phase_map.seed}",
        f"mode={phase_map.sampling_mode}",
        "alphabet=" + ",".join(_alphabet_token(a) for a in phase_map.alphabet),
    ]
    for row in phase_map.rows:
        lines.append(" ".join(_format_pi_units(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def _snap_to_alphabet(value_rad: float, alphabet: tuple[float, ...], line: int, col: int) -> float:
    for member in alphabet:
        if abs(value_rad - member) <= 1e-9:
            return member
    raise MapParseError(
        f"entry {col} is {value_rad / math.pi!r} pi, outside the alphabet "
        f"{tuple(round(a / math.pi, 12) for a in alphabet)} (in pi units)",
        line,
    )


def load_map(path) -> PhaseMap:
    """Parse a map file; inverse of save_map.

    Entries are snapped onto the declared alphabet (tolerance 1e-9 rad) so
    round trips are bit-exact. If regenerating from the header reproduces
    the stored rows, the disorder mask is re-attached; otherwise the map is
    treated as hand-made and carries no mask.
    """
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    header: dict[str, str] = {}
    expected = ["steps", "p", "seed", "mode", "alphabet"]
    for i, key in enumerate(expected):
        if i >= len(lines):
            raise MapParseError(f"missing header line '{key}='", i + 1)
        raw = lines[i].strip()
        if "=" not in raw:
            raise MapParseError(f"expected 'key=value', got {raw!r}", i + 1)
        k, _, v = raw.partition("=")
        if k != key:
            raise MapParseError(f"expected header '{key}=', got '{k}='", i + 1)
        header[k] = v

    try:
        steps = int(header["steps"])
    except ValueError:
        raise MapParseError(f"steps is not an integer: {header['steps']!r}", 1) from None
    if steps < 1:
        raise MapParseError(f"steps must be >= 1, got {steps}", 1)
    try:
        p_nominal = float(header["p"])
    except ValueError:
        raise MapParseError(f"p is not a number: {header['p']!r}", 2) from None
    if not 0.0 <= p_nominal <= 1.0:
        raise MapParseError(f"p must lie in [0, 1], got {p_nominal!r}", 2)
    try:
        seed = int(header["seed"])
    except ValueError:
        raise MapParseError(f"seed is not an integer: {header['seed']!r}", 3) from None
    mode = header["mode"]
    if mode not in SAMPLING_MODES:
        raise MapParseError(f"mode must be one of {SAMPLING_MODES}, got {mode!r}", 4)
    alphabet = tuple(
        _parse_alphabet_token(tok.strip(), 5) for tok in header["alphabet"].split(",") if tok.strip()
    )
    if not alphabet:
        raise MapParseError("alphabet is empty", 5)

    body = lines[5:]
    if len(body) < steps:
        raise MapParseError(f"expected {steps} row lines, file has {len(body)}", len(lines))
    rows = []
    for n in range(1, steps + 1):
        line_no = 5 + n
        tokens = body[n - 1].split()
        if len(tokens) != 2 * n + 1:
            raise MapParseError(
                f"row {n} must have {2 * n + 1} entries, got {len(tokens)}", line_no
            )
        row = np.empty(2 * n + 1)
        for col, tok in enumerate(tokens):
            try:
                units = float(tok)
            except ValueError:
                raise MapParseError(f"entry {col} is not a number: {tok!r}", line_no) from None
            row[col] = _snap_to_alphabet(units * math.pi, alphabet, line_no, col)
        rows.append(row)
    trailing = [ln for ln in body[steps:] if ln.strip()]
    if trailing:
        raise MapParseError(f"unexpected trailing content: {trailing[0]!r}", 5 + steps + 1)

    mask = None
    regen_rows, regen_mask = _sample(steps, p_nominal, alphabet, mode, seed)
    if all(np.array_equal(a, b) for a, b in zip(regen_rows, rows)):
        mask = regen_mask
    return PhaseMap(
        steps=steps,
        rows=tuple(rows),
        alphabet=alphabet,
        p_nominal=p_nominal,
        seed=seed,
        sampling_mode=mode,
        mask=mask,
    )
