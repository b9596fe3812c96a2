import random

import pytest

from freecert.grounded import (
    double_set,
    extension_chain,
    grounded_hull,
    grounded_set,
    is_grounded,
)
from freecert.words import (
    free_group,
    generator,
    inverse,
    multiply,
    unit,
)

F2 = free_group(2)
E1 = unit(F2)


def g(i, e=1):
    return generator(F2, i, e)


def random_grounded(rng, max_size=10):
    words = {E1}
    frontier = [E1]
    while len(words) < rng.randrange(1, max_size + 1):
        base = rng.choice(frontier)
        ext = multiply(generator(F2, rng.randrange(1, 3), rng.choice([-1, 1])), base)
        if ext not in words:
            words.add(ext)
            frontier.append(ext)
    return grounded_set(F2, words)


def test_is_grounded_examples():
    assert is_grounded(F2, {E1})
    assert not is_grounded(F2, {E1, g(1), multiply(g(1), g(2))})
    assert is_grounded(F2, {E1, g(2), multiply(g(1), g(2))})


def test_unit_required():
    assert not is_grounded(F2, {g(1)})
    assert not is_grounded(F2, set())


def test_double_set_examples():
    E = grounded_set(F2, {E1})
    assert double_set(E) == [E1]
    E = grounded_set(F2, {E1, g(1)})
    assert set(double_set(E)) == {E1, g(1), g(1, -1)}
    E = grounded_set(F2, {E1, g(1), g(2)})
    expected = {E1, g(1), g(1, -1), g(2), g(2, -1),
                multiply(g(1, -1), g(2)), multiply(g(2, -1), g(1))}
    assert set(double_set(E)) == expected


def test_double_set_matches_brute_force_and_is_inverse_closed():
    rng = random.Random(21)
    for _ in range(50):
        E = random_grounded(rng)
        ds = double_set(E)
        brute = {multiply(inverse(s), t) for s in E for t in E}
        assert set(ds) == brute
        assert all(inverse(w) in brute for w in ds)
        assert E1 in brute


def test_grounded_hull_examples():
    H = grounded_hull(F2, {multiply(g(1), g(2))})
    assert set(H) == {E1, g(2), multiply(g(1), g(2))}
    assert set(grounded_hull(F2, set())) == {E1}
    H = grounded_hull(F2, {g(1, 2), g(2, -1)})
    assert set(H) == {E1, g(1), g(1, 2), g(2, -1)}


def test_hull_is_grounded_random():
    rng = random.Random(22)
    for _ in range(100):
        words = {random_word(rng) for _ in range(rng.randrange(4))}
        H = grounded_hull(F2, words)
        assert is_grounded(F2, set(H))
        assert words <= set(H)


def random_word(rng, max_len=5):
    w = E1
    for _ in range(rng.randrange(max_len + 1)):
        w = multiply(w, generator(F2, rng.randrange(1, 3), rng.choice([-1, 1])))
    return w


def test_extension_chain_examples():
    E = grounded_set(F2, {E1})
    F = grounded_set(F2, {E1, g(1), g(1, 2)})
    assert extension_chain(E, F) == [g(1), g(1, 2)]
    assert extension_chain(F, F) == []
    F = grounded_set(F2, {E1, g(1), g(2)})
    assert extension_chain(E, F) == [g(1), g(2)]


def test_extension_chain_prefixes_grounded():
    rng = random.Random(23)
    for _ in range(100):
        F = random_grounded(rng, max_size=10)
        sub = {E1}
        for w in F:
            if not w.is_unit and rng.random() < 0.4:
                sub.add(w)
        E = grounded_hull(F2, sub)
        if not set(E) <= set(F):
            continue
        chain = extension_chain(E, F)
        current = set(E)
        for t in chain:
            current.add(t)
            assert is_grounded(F2, current)
        assert current == set(F)


def test_extension_chain_containment_error():
    E = grounded_set(F2, {E1, g(1)})
    F = grounded_set(F2, {E1, g(2)})
    with pytest.raises(ValueError):
        extension_chain(E, F)


def test_grounded_set_rejects_bad_input():
    with pytest.raises(ValueError):
        grounded_set(F2, {E1, multiply(g(1), g(2))})
