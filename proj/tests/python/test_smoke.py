import math
from functools import lru_cache
from pathlib import Path

import pytest

hypsft = pytest.importorskip("hypsft")

DATA = Path(__file__).resolve().parents[2] / "data"


@lru_cache(maxsize=None)
def group(name):
    oracle = hypsft.GroupOracle(hypsft.Presentation.from_file(str(DATA / f"{name}.txt")))
    return oracle, hypsft.ShortlexFsa.build(oracle)


def test_free_group_growth():
    oracle, fsa = group("f2")
    g = hypsft.analyze_growth(fsa)
    assert g["lambda"] == pytest.approx(3.0, abs=1e-12)
    # sphere sizes of F2 are 4 * 3^(n-1)
    assert fsa.sphere_counts(5) == [1, 4, 12, 36, 108, 324]
    assert oracle.sphere_sizes(3) == [1, 4, 12, 36]
    assert max(g["residual"], 0) < 1e-30
    assert hypsft.incommensurable(fsa, 2)
    assert not hypsft.incommensurable(fsa, 3)


def test_genus2_automaton():
    oracle, fsa = group("genus2")
    assert fsa.num_states == 36
    assert fsa.validate(oracle, 4) == []
    assert oracle.sphere_sizes(3) == [1, 8, 56, 392]
    assert oracle.normal_form("a b A B c d C D") == "1"
    text = fsa.to_text(oracle.presentation)
    assert hypsft.ShortlexFsa.parse(text, oracle.presentation) == fsa


def test_balanced_sequence_means():
    _, fsa = group("f2")
    nu, delta = hypsft.balanced_sequence(fsa, 2, 5.0, 5.0, 2000)
    assert len(delta) == 2000
    assert set(delta) <= {1, 2}
    assert all(5.0 <= x < 5.0 * 2 * 3 / 2 + 1e-9 for x in nu)
    assert sum(delta) / len(delta) == pytest.approx(math.log2(3), abs=1e-2)


def test_patch_round_trip_and_mutation():
    oracle, fsa = group("genus2")
    text = hypsft.generate_patch(oracle, fsa, 4, 6, 2, seed=3)
    assert hypsft.check_patch(oracle, fsa, text) == []
    lines = text.splitlines()
    i = next(k for k, line in enumerate(lines) if line.startswith("cell: 1 "))
    assert "state=" in lines[i]
    state = int(lines[i].split("state=")[1].split()[0])
    lines[i] = lines[i].replace(f"state={state}", f"state={(state + 1) % 36}")
    assert hypsft.check_patch(oracle, fsa, "\n".join(lines) + "\n") != []


def test_populate_and_verify():
    oracle, fsa = group("genus2")
    text = hypsft.populate(oracle, fsa, 6, 7, q=2, delta=2, seed=1)
    assert hypsft.verify(oracle, fsa, text) == []
    first = next(line for line in text.splitlines() if line.startswith("match: "))
    broken = text.replace(first + "\n", "", 1)
    kinds = {v[0] for v in hypsft.verify(oracle, fsa, broken)}
    assert any(k.startswith("match-") for k in kinds)


def test_coloring_and_errors():
    oracle, _ = group("genus2")
    colors, conflicts, colouring = hypsft.torsion_coloring(oracle, 1, 3)
    assert conflicts == 0
    assert colors <= 9
    assert len(colouring) == 1 + 8 + 56 + 392
    with pytest.raises(hypsft.ConfigError):
        hypsft.torsion_coloring(oracle, 0, 3)
    with pytest.raises(hypsft.InputError):
        hypsft.Presentation.parse("generators: a\n")
    assert issubclass(hypsft.ConfigError, hypsft.Error)
