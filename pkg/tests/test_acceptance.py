"""The eleven acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or as a script.
"""

import sys

import pytest

from tcspace import acceptance

SEED = 0
CRITERIA = {
    1: lambda corpus: acceptance.laakso_bound(),
    2: lambda corpus: acceptance.laakso_structure(),
    3: lambda corpus: acceptance.effective_charge_equality(corpus),
    4: lambda corpus: acceptance.product_identities(corpus),
    5: lambda corpus: acceptance.recursion_invariants(corpus, SEED),
    6: lambda corpus: acceptance.series_agreement(corpus, SEED),
    7: lambda corpus: acceptance.five_point_reproduction(),
    8: lambda corpus: acceptance.tree_characterisation(SEED),
    9: lambda corpus: acceptance.hyperbolic_bound(),
    10: lambda corpus: acceptance.doubling_consistency(),
    11: lambda corpus: acceptance.transport_oracle(SEED),
}


@pytest.fixture(scope="module")
def corpus():
    return acceptance.random_corpus(SEED)


def test_corpus_shape(corpus):
    assert len(corpus) >= 200
    assert {space.N for space, _ in corpus} == set(range(3, 8))
    assert all(basis.is_normalised() for _, basis in corpus)


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, corpus, capsys):
    result = CRITERIA[number](corpus)
    with capsys.disabled():
        print(f"\n{result.line()}", end=" ")
    assert result.number == number
    assert result.passed, result.details


def main() -> int:
    corpus = acceptance.random_corpus(SEED)
    results = [CRITERIA[n](corpus) for n in sorted(CRITERIA)]
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
