"""Ingestion of mechanical mode tables and reference coupling tables.

Mode CSV layout::

    family,index,freq_mhz,m_eff_pg,u_zpf_fm,g_max_khz
    F,1,0.0091,182.6,70.9,34.19

``freq_mhz`` is Omega/2pi and ``g_max_khz`` is |g_max|/2pi. Tabulated
columns are kept as exact decimals so a catalog serializes back to the
same text; SI values are derived once, at construction.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

from .units import FEMTOMETRE, HBAR, KHZ, MHZ, PICOGRAM, TWO_PI

MODE_COLUMNS = ("family", "index", "freq_mhz", "m_eff_pg", "u_zpf_fm", "g_max_khz")
REFERENCE_COLUMNS = ("family", "index", "theta_sq", "eta_sq")

FIXTURES_ENV = "PHONON_FIXTURES_DIR"


class CatalogError(ValueError):
    """Malformed or invalid table input."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.column = column


class ModeFamily(enum.Enum):
    FLEXURAL = "F"
    LONGITUDINAL = "L"
    TORSIONAL = "T"

    @property
    def rank(self) -> int:
        return _FAMILY_RANK[self]

    @classmethod
    def parse(cls, tag: str) -> ModeFamily:
        try:
            return cls(tag.strip())
        except ValueError:
            raise ValueError(f"unknown mode family {tag!r}; expected one of F, L, T") from None


_FAMILY_RANK = {ModeFamily.FLEXURAL: 0, ModeFamily.LONGITUDINAL: 1, ModeFamily.TORSIONAL: 2}


def _dec(x) -> Decimal:
    if isinstance(x, Decimal):
        return x
    return Decimal(str(x))


@dataclass(frozen=True)
class ModeRecord:
    """One mechanical eigenmode, as tabulated.

    The ``*_mhz``/``*_pg``/``*_fm``/``*_khz`` fields hold the table values
    verbatim. ``omega``, ``m_eff``, ``u_zpf`` and ``g_max`` are their SI
    counterparts (rad/s, kg, m, rad/s).
    """

    family: ModeFamily
    index: int
    freq_mhz: Decimal
    m_eff_pg: Decimal
    u_zpf_fm: Decimal | None
    g_max_khz: Decimal
    omega: float = field(init=False, compare=False, repr=False)
    m_eff: float = field(init=False, compare=False, repr=False)
    u_zpf: float | None = field(init=False, compare=False, repr=False)
    g_max: float = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        fam = self.family if isinstance(self.family, ModeFamily) else ModeFamily.parse(self.family)
        object.__setattr__(self, "family", fam)
        if isinstance(self.index, bool) or int(self.index) != self.index or self.index < 1:
            raise ValueError(f"mode index must be a positive integer, got {self.index!r}")
        object.__setattr__(self, "index", int(self.index))
        for name in ("freq_mhz", "m_eff_pg", "g_max_khz"):
            object.__setattr__(self, name, _dec(getattr(self, name)))
        if self.u_zpf_fm is not None:
            object.__setattr__(self, "u_zpf_fm", _dec(self.u_zpf_fm))
        for name in ("freq_mhz", "m_eff_pg", "g_max_khz", "u_zpf_fm"):
            v = getattr(self, name)
            if v is not None and not v.is_finite():
                raise ValueError(f"{name} must be finite")
        if self.freq_mhz <= 0:
            raise ValueError(f"frequency must be positive, got {self.freq_mhz} MHz")
        if self.m_eff_pg <= 0:
            raise ValueError(f"effective mass must be positive, got {self.m_eff_pg} pg")
        if self.g_max_khz < 0:
            raise ValueError(f"|g_max| must be non-negative, got {self.g_max_khz} kHz")
        if self.u_zpf_fm is not None and self.u_zpf_fm <= 0:
            raise ValueError(f"u_zpf must be positive, got {self.u_zpf_fm} fm")

        object.__setattr__(self, "omega", TWO_PI * float(self.freq_mhz) * MHZ)
        object.__setattr__(self, "m_eff", float(self.m_eff_pg) * PICOGRAM)
        object.__setattr__(
            self, "u_zpf", None if self.u_zpf_fm is None else float(self.u_zpf_fm) * FEMTOMETRE
        )
        object.__setattr__(self, "g_max", TWO_PI * float(self.g_max_khz) * KHZ)

    @property
    def key(self) -> tuple[ModeFamily, int]:
        return (self.family, self.index)

    @property
    def label(self) -> str:
        return f"{self.family.value}{self.index}"

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.family.rank, self.index)

    def zero_point_displacement(self) -> float:
        """sqrt(hbar / (2 m_eff omega)) in metres."""
        return math.sqrt(HBAR / (2.0 * self.m_eff * self.omega))


@dataclass(frozen=True)
class ModeCatalog:
    """Immutable, canonically ordered set of modes for one structure."""

    structure_label: str
    records: tuple[ModeRecord, ...]

    def __post_init__(self):
        recs = tuple(sorted(self.records, key=lambda r: r.sort_key))
        if not recs:
            raise CatalogError("empty catalog")
        seen = set()
        for r in recs:
            if r.key in seen:
                raise CatalogError(f"duplicate mode {r.label}")
            seen.add(r.key)
        object.__setattr__(self, "records", recs)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, key) -> ModeRecord:
        if isinstance(key, int):
            return self.records[key]
        fam, idx = key
        fam = fam if isinstance(fam, ModeFamily) else ModeFamily.parse(fam)
        for r in self.records:
            if r.family is fam and r.index == idx:
                return r
        raise KeyError(key)

    def count(self, family: ModeFamily) -> int:
        return sum(1 for r in self.records if r.family is family)


@dataclass(frozen=True)
class ReferenceCoupling:
    family: ModeFamily
    index: int
    theta_sq: float
    eta_sq: float

    @property
    def key(self) -> tuple[ModeFamily, int]:
        return (self.family, self.index)

    @property
    def label(self) -> str:
        return f"{self.family.value}{self.index}"


@dataclass(frozen=True)
class ReferenceCouplingTable:
    entries: tuple[ReferenceCoupling, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def as_dict(self) -> dict[tuple[ModeFamily, int], ReferenceCoupling]:
        return {e.key: e for e in self.entries}


def _rows(stream: TextIO, columns: tuple[str, ...]) -> Iterable[tuple[int, dict[str, str]]]:
    """Yield (line number, row) pairs, skipping comments and blank lines."""
    header = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if lineno == 1:
            line = line.lstrip("﻿")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            if tuple(header) != columns:
                raise CatalogError(
                    f"bad header {','.join(header)!r}; expected {','.join(columns)!r}", line=lineno
                )
            continue
        if len(cells) != len(columns):
            raise CatalogError(
                f"expected {len(columns)} fields, got {len(cells)}",
                line=lineno,
                column=columns[min(len(cells), len(columns) - 1)],
            )
        yield lineno, dict(zip(columns, (c.strip() for c in cells)))
    if header is None:
        raise CatalogError("empty catalog")


def _number(text: str, lineno: int, column: str) -> Decimal:
    # decimal or scientific notation only; "1,234" never reaches here as one cell
    # but "1 234" or "1_234" would be accepted by Decimal/float and must not be
    if not text or any(c in text for c in " _,'"):
        raise CatalogError(f"not a number: {text!r}", line=lineno, column=column)
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise CatalogError(f"not a number: {text!r}", line=lineno, column=column) from None
    if not value.is_finite():
        raise CatalogError(f"not a finite number: {text!r}", line=lineno, column=column)
    return value


def _index(text: str, lineno: int) -> int:
    if not text.isdigit() or int(text) < 1:
        raise CatalogError(f"mode index must be a positive integer, got {text!r}", line=lineno, column="index")
    return int(text)


def _family(text: str, lineno: int) -> ModeFamily:
    try:
        return ModeFamily.parse(text)
    except ValueError as exc:
        raise CatalogError(str(exc), line=lineno, column="family") from None


def _as_stream(text) -> TextIO:
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def parse_mode_table(text, structure_label: str) -> ModeCatalog:
    """Parse a mode CSV (string or text stream) into a :class:`ModeCatalog`."""
    records = []
    seen: dict[tuple[ModeFamily, int], int] = {}
    for lineno, row in _rows(_as_stream(text), MODE_COLUMNS):
        fam = _family(row["family"], lineno)
        idx = _index(row["index"], lineno)
        if (fam, idx) in seen:
            raise CatalogError(
                f"duplicate mode {fam.value}{idx} (first seen on line {seen[(fam, idx)]})",
                line=lineno,
            )
        seen[(fam, idx)] = lineno
        values = {}
        for col in ("freq_mhz", "m_eff_pg", "g_max_khz"):
            values[col] = _number(row[col], lineno, col)
        values["u_zpf_fm"] = _number(row["u_zpf_fm"], lineno, "u_zpf_fm") if row["u_zpf_fm"] else None
        for col, what in (("freq_mhz", "frequency"), ("m_eff_pg", "effective mass")):
            if values[col] <= 0:
                raise CatalogError(f"{what} must be positive, got {row[col]}", line=lineno, column=col)
        if values["g_max_khz"] < 0:
            raise CatalogError("coupling must be non-negative", line=lineno, column="g_max_khz")
        if values["u_zpf_fm"] is not None and values["u_zpf_fm"] <= 0:
            raise CatalogError("u_zpf must be positive", line=lineno, column="u_zpf_fm")
        records.append(ModeRecord(fam, idx, **values))
    if not records:
        raise CatalogError("empty catalog")
    return ModeCatalog(structure_label, tuple(records))


def parse_reference_couplings(text) -> ReferenceCouplingTable:
    """Parse a ``family,index,theta_sq,eta_sq`` CSV."""
    entries = []
    seen = set()
    for lineno, row in _rows(_as_stream(text), REFERENCE_COLUMNS):
        fam = _family(row["family"], lineno)
        idx = _index(row["index"], lineno)
        if (fam, idx) in seen:
            raise CatalogError(f"duplicate mode {fam.value}{idx}", line=lineno)
        seen.add((fam, idx))
        vals = {}
        for col in ("theta_sq", "eta_sq"):
            v = _number(row[col], lineno, col)
            if v < 0:
                raise CatalogError(f"{col} must be non-negative, got {row[col]}", line=lineno, column=col)
            vals[col] = float(v)
        entries.append(ReferenceCoupling(fam, idx, **vals))
    if not entries:
        raise CatalogError("empty catalog")
    entries.sort(key=lambda e: (e.family.rank, e.index))
    return ReferenceCouplingTable(tuple(entries))


def serialize_mode_table(catalog: ModeCatalog) -> str:
    """Write a catalog back to the canonical CSV layout (LF line endings)."""
    out = [",".join(MODE_COLUMNS)]
    for r in catalog.records:
        u = "" if r.u_zpf_fm is None else str(r.u_zpf_fm)
        out.append(f"{r.family.value},{r.index},{r.freq_mhz},{r.m_eff_pg},{u},{r.g_max_khz}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ZpfDiscrepancy:
    label: str
    tabulated: float  # m
    computed: float  # m
    deviation: float  # relative, after allowing for table rounding


def validate_zpf(catalog: ModeCatalog, tolerance: float = 0.05, rounding_aware: bool = True) -> list[ZpfDiscrepancy]:
    """Compare tabulated zero-point displacements with sqrt(hbar/(2 m omega)).

    With ``rounding_aware`` the tabulated decimal stands for the interval
    of half a unit in its last printed digit (0.2 fm means [0.15, 0.25] fm)
    and the deviation is the relative distance of the computed value from
    that interval. Nothing is corrected; offending records are returned.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    bad = []
    for r in catalog.records:
        if r.u_zpf_fm is None:
            continue
        computed = r.zero_point_displacement()
        tab = float(r.u_zpf_fm) * FEMTOMETRE
        if rounding_aware:
            half = float(Decimal(1).scaleb(r.u_zpf_fm.as_tuple().exponent)) / 2 * FEMTOMETRE
            lo, hi = tab - half, tab + half
            gap = 0.0 if lo <= computed <= hi else min(abs(computed - lo), abs(computed - hi))
        else:
            gap = abs(computed - tab)
        dev = gap / computed
        if dev > tolerance:
            bad.append(ZpfDiscrepancy(r.label, tab, computed, dev))
    return bad


def fixtures_dir() -> Path:
    """Directory holding the shipped tables; ``PHONON_FIXTURES_DIR`` overrides."""
    env = os.environ.get(FIXTURES_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("qdphonons") / "data"))


def load_catalog(label: str, directory: Path | None = None) -> ModeCatalog:
    """Load ``modes_<label>.csv`` from the fixtures directory."""
    path = (directory or fixtures_dir()) / f"modes_{label}.csv"
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_mode_table(fh, label)


def load_reference(label: str, directory: Path | None = None) -> ReferenceCouplingTable:
    path = (directory or fixtures_dir()) / f"couplings_{label}.csv"
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_reference_couplings(fh)
