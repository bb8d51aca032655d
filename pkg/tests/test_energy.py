import math

import pytest
from hypothesis import given, strategies as st

from memeflow.energy import (
    Constituent,
    ConstituentSet,
    EnergyLevels,
    activation_energy,
    delta_energy,
    parse_constituents_csv,
)
from memeflow.errors import CsvFormatError, ValidationError

energies = st.lists(st.floats(0, 1e6, allow_nan=False), max_size=6)


def make_set(groups, prefix="c"):
    return ConstituentSet(tuple(Constituent(f"{prefix}{i}", g) for i, g in enumerate(groups)))


def test_empty_set_is_zero():
    assert activation_energy(ConstituentSet()) == 0.0


def test_single_constituent_sum():
    assert activation_energy(make_set([[1.0, 2.0, 0.5]])) == 3.5


def test_two_tetravalent_constituents():
    assert activation_energy(make_set([[1.0] * 4, [1.0] * 4])) == 8.0


def test_constituent_without_dofs_contributes_nothing():
    assert activation_energy(make_set([[], [2.0]])) == 2.0


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_invalid_energy_names_constituent(bad):
    cset = ConstituentSet((Constituent("ok", (1.0,)), Constituent("carbon", (1.0, bad))))
    with pytest.raises(ValidationError, match="carbon"):
        activation_energy(cset)


def test_duplicate_ids_rejected():
    with pytest.raises(ValidationError):
        ConstituentSet((Constituent("a", (1.0,)), Constituent("a", (2.0,))))


def test_delta_energy_examples():
    assert delta_energy(EnergyLevels(2.0, 5.0)) == 3.0
    assert delta_energy(EnergyLevels(0.0, 0.0)) == 0.0
    with pytest.raises(ValidationError):
        delta_energy(EnergyLevels(5.0, 2.0))


def test_delta_energy_composes_with_activation_energy():
    resting = make_set([[0.5, 0.25], [1.0]], "r")
    active = make_set([[1.0, 1.0, 1.0], [2.0, 0.5]], "a")
    # by hand: 0.5 + 0.25 + 1.0 = 1.75 and 3.0 + 2.5 = 5.5
    levels = EnergyLevels(activation_energy(resting), activation_energy(active))
    assert delta_energy(levels) == pytest.approx(5.5 - 1.75, abs=0)


@given(st.lists(energies, max_size=5), st.lists(energies, max_size=5))
def test_additive_over_disjoint_sets(g1, g2):
    s1, s2 = make_set(g1, "x"), make_set(g2, "y")
    total = activation_energy(s1.union(s2))
    assert total == pytest.approx(activation_energy(s1) + activation_energy(s2), rel=1e-12, abs=1e-9)


@given(st.lists(energies, max_size=5), st.randoms())
def test_permutation_invariant(groups, rnd):
    base = activation_energy(make_set(groups))
    shuffled = [rnd.sample(g, len(g)) for g in groups]
    cs = list(make_set(shuffled).constituents)
    rnd.shuffle(cs)
    assert activation_energy(ConstituentSet(tuple(cs))) == base


@given(st.floats(0, 1e9), st.floats(0, 1e9))
def test_delta_nonnegative_when_constructed(a, b):
    lo, hi = sorted((a, b))
    assert delta_energy(EnergyLevels(lo, hi)) >= 0


def test_parse_csv_groups_and_orders_dofs():
    text = "id,dof_index,energy\nC1,1,2.0\nC1,0,1.0\nC2,0,0.5\n"
    cset = parse_constituents_csv(text)
    assert [c.id for c in cset.constituents] == ["C1", "C2"]
    assert cset.constituents[0].dof_energies == (1.0, 2.0)
    assert activation_energy(cset) == 3.5


@pytest.mark.parametrize(
    "text, line",
    [
        ("id,dof_index,energy\nA,0,1\nA,2,1\n", 2),  # gap in dof indices
        ("id,dof_index,energy\nA,0,1\nB,0,1\nA,1,1\n", 4),  # ungrouped
        ("id,dof_index,energy\nA,0,x\n", 2),
        ("id,energy\nA,1\n", 1),
        ("", 1),
    ],
)
def test_parse_csv_errors_carry_line(text, line):
    with pytest.raises(CsvFormatError) as info:
        parse_constituents_csv(text)
    assert info.value.line == line
