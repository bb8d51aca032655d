"""Activation and relative energies of constituent sets.

A constituent carries one precomputed energy cost per degree of freedom.
The activation energy of a set is the double sum of those costs over every
constituent and every degree of freedom; all degrees of freedom participate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CsvFormatError, ValidationError
from .series import _parse_rows, _to_float


@dataclass(frozen=True)
class Constituent:
    id: str
    dof_energies: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dof_energies", tuple(float(e) for e in self.dof_energies))


@dataclass(frozen=True)
class ConstituentSet:
    constituents: tuple[Constituent, ...] = ()

    def __post_init__(self):
        items = tuple(self.constituents)
        seen = set()
        for c in items:
            if c.id in seen:
                raise ValidationError(f"duplicate constituent id {c.id!r}")
            seen.add(c.id)
        object.__setattr__(self, "constituents", items)

    def __len__(self):
        return len(self.constituents)

    def union(self, other: "ConstituentSet") -> "ConstituentSet":
        return ConstituentSet(self.constituents + other.constituents)


@dataclass(frozen=True)
class EnergyLevels:
    resting: float
    activation: float


def activation_energy(cset: ConstituentSet) -> float:
    """Total energy needed to aggregate ``cset`` into a larger structure.

    Raises ValidationError naming the first constituent holding a NaN,
    infinite or negative degree-of-freedom energy.
    """
    terms = []
    for c in cset.constituents:
        for j, e in enumerate(c.dof_energies):
            if not math.isfinite(e) or e < 0:
                raise ValidationError(
                    f"constituent {c.id!r}: degree of freedom {j} has invalid energy {e!r}"
                )
        terms.extend(c.dof_energies)
    # fsum is correctly rounded, so the result is exactly order independent
    return math.fsum(terms)


def delta_energy(levels: EnergyLevels) -> float:
    """Energy gap between activation and resting levels (never negative)."""
    for name in ("resting", "activation"):
        v = getattr(levels, name)
        if not math.isfinite(v) or v < 0:
            raise ValidationError(f"{name} energy must be finite and >= 0, got {v!r}")
    if levels.activation < levels.resting:
        raise ValidationError(
            f"activation energy {levels.activation!r} is below resting energy {levels.resting!r}"
        )
    return levels.activation - levels.resting


def parse_constituents_csv(text: str) -> ConstituentSet:
    """Parse ``id,dof_index,energy`` rows into a ConstituentSet.

    Rows for one id must be adjacent and their dof indices must cover
    ``0..J`` without gaps (any order within the group).
    """
    _, rows = _parse_rows(text, expected_header=("id", "dof_index", "energy"))
    groups: list[tuple[str, dict[int, float], int]] = []
    closed = set()
    for line, cells in rows:
        if len(cells) != 3:
            raise CsvFormatError(f"expected 3 fields, got {len(cells)}", line=line)
        cid = cells[0]
        if not cid:
            raise CsvFormatError("empty constituent id", line=line)
        try:
            j = int(cells[1])
        except ValueError:
            raise CsvFormatError(f"dof_index {cells[1]!r} is not an integer", line=line) from None
        e = _to_float(cells[2], line, "energy")
        if not groups or groups[-1][0] != cid:
            if cid in closed:
                raise CsvFormatError(f"rows for id {cid!r} are not grouped together", line=line)
            if groups:
                closed.add(groups[-1][0])
            groups.append((cid, {}, line))
        dofs = groups[-1][1]
        if j in dofs:
            raise CsvFormatError(f"id {cid!r}: duplicate dof_index {j}", line=line)
        dofs[j] = e
    out = []
    for cid, dofs, line in groups:
        if sorted(dofs) != list(range(len(dofs))):
            raise CsvFormatError(f"id {cid!r}: dof_index values must be contiguous from 0", line=line)
        out.append(Constituent(cid, tuple(dofs[j] for j in range(len(dofs)))))
    return ConstituentSet(tuple(out))
