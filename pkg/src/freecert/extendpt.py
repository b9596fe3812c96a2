"""Positive-type extension of partially defined functions on grounded subsets
of a free group via iterated tree completion.

A partial positive-type function lives on E^{-1}E for a grounded E. Extending
it to a larger grounded set proceeds one word at a time: adjoining t0 = s^{a}
t0'' splits E into the words whose quotient against t0 is already known (E1)
and the rest (E0), and the unknown entries are read off the canonical
three-block completion with block order (E0, E1, {t0}).

The construction needs the Cayley graph to be a tree, which is why only free
groups are accepted: on groups with relations (already on the Z x Z lattice)
partially defined positive-type functions exist that admit no positive-type
extension, so no analogous completion step is possible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import random_rep, rep_matrix, toeplitz_matrix
from .denselin import PartialBlockMatrix, complete_block, psd_floor
from .grounded import GroundedSet, double_set, extension_chain, grounded_set
from .words import (
    FREE,
    Word,
    first_letter,
    generator,
    inverse,
    multiply,
    unit,
)

__all__ = [
    "PartialPositiveType",
    "partial_positive_type",
    "extend_one",
    "extend_to",
    "random_positive_type",
]

INPUT_PSD_TOL = 1e-8
OUTPUT_PSD_TOL = 1e-7


@dataclass(frozen=True)
class PartialPositiveType:
    """Values on E^{-1}E whose Toeplitz compression over E is PSD."""

    E: GroundedSet
    values: dict[Word, complex]

    @property
    def spec(self):
        return self.E.spec

    def scale(self) -> float:
        return 1.0 + max((abs(v) for v in self.values.values()), default=0.0)

    def gram(self) -> np.ndarray:
        return toeplitz_matrix(self.values, list(self.E))

    def restrict_to(self, E: GroundedSet) -> "PartialPositiveType":
        dom = set(double_set(E))
        return PartialPositiveType(
            E, {w: v for w, v in self.values.items() if w in dom})


def partial_positive_type(E: GroundedSet, values: dict[Word, complex],
                          psd_tol: float = INPUT_PSD_TOL) -> PartialPositiveType:
    """Validate a partial positive-type function: domain exactly E^{-1}E,
    hermitian symmetry, real at the unit, PSD Toeplitz compression."""
    if E.spec.kind != FREE:
        raise ValueError("positive-type extension requires a free group")
    dom = double_set(E)
    dom_set = set(dom)
    extra = set(values) - dom_set
    if extra:
        raise ValueError(f"values outside E^-1E: {sorted(map(str, extra))}")
    missing = dom_set - set(values)
    if missing:
        raise ValueError(f"values missing on E^-1E: {sorted(map(str, missing))}")
    vals = {w: complex(v) for w, v in values.items()}
    scale = 1.0 + max((abs(v) for v in vals.values()), default=0.0)
    for w, v in vals.items():
        if abs(v - vals[inverse(w)].conjugate()) > 1e-12 * scale:
            raise ValueError("values break hermitian symmetry")
    u = unit(E.spec)
    if abs(vals[u].imag) > 1e-12 * scale:
        raise ValueError("value at the unit must be real")
    vals[u] = complex(vals[u].real, 0.0)
    g = PartialPositiveType(E, vals)
    floor = psd_floor(g.gram())
    if floor < -psd_tol * scale:
        raise ValueError(f"Toeplitz compression is not PSD (floor {floor:g})")
    return g


def _split_sets(g: PartialPositiveType, t0: Word):
    """E1 = words of E whose quotient with t0 already lies in E^-1E, computed
    by the first-letter rule; E0 is the rest."""
    gen, sign = first_letter(t0)
    e_set = g.E.as_set()
    step = generator(g.spec, gen, sign)
    # t0 = step * t0'' with t0'' in E; s in E1 iff step^{-1} s in E
    step_inv = inverse(step)
    E1 = [s for s in g.E if multiply(step_inv, s) in e_set]
    E0 = [s for s in g.E if multiply(step_inv, s) not in e_set]
    return E0, E1


def extend_one(g: PartialPositiveType, t0: Word) -> PartialPositiveType:
    """Extend g to the grounded set E u {t0}, filling the genuinely new
    quotients from the three-block completion."""
    if t0 in g.E.as_set():
        raise ValueError("t0 already belongs to E")
    new_elements = set(g.E) | {t0}
    E_new = grounded_set(g.spec, new_elements)  # raises if not grounded

    E0, E1 = _split_sets(g, t0)
    val = g.values

    def block(rows, cols):
        M = np.empty((len(rows), len(cols)), dtype=complex)
        for i, s in enumerate(rows):
            si = inverse(s)
            for j, t in enumerate(cols):
                M[i, j] = val[multiply(si, t)]
        return M

    A = block(E0, E0)
    X = block(E0, E1)
    B = block(E1, E1)
    dom = set(val)
    for s in E1:
        if multiply(inverse(s), t0) not in dom:
            raise AssertionError("split-set rule produced an unknown quotient")
    Y = np.array([[val[multiply(inverse(s), t0)]] for s in E1],
                 dtype=complex).reshape(len(E1), 1)
    C = np.array([[val[unit(g.spec)]]], dtype=complex)

    Z, _ = complete_block(PartialBlockMatrix(A, X, B, Y, C))

    new_vals = dict(val)
    for i, s in enumerate(E0):
        q = multiply(inverse(s), t0)
        if q in dom:
            raise AssertionError("quotient for an E0 word is already known")
        new_vals[q] = complex(Z[i, 0])
        new_vals[inverse(q)] = complex(Z[i, 0]).conjugate()

    out = PartialPositiveType(E_new, new_vals)
    missing = set(double_set(E_new)) - set(new_vals)
    if missing:
        raise AssertionError(f"extension left undefined quotients: {missing}")
    scale = out.scale()
    floor = psd_floor(out.gram())
    if floor < -OUTPUT_PSD_TOL * scale:
        raise ValueError(
            f"completion failed to stay PSD (floor {floor:g}); "
            "input likely violated the PSD tolerance")
    return out


def extend_to(g: PartialPositiveType, F: GroundedSet) -> PartialPositiveType:
    """Extend g along the canonical chain from E to the grounded superset F."""
    chain = extension_chain(g.E, F)
    out = g
    for t0 in chain:
        out = extend_one(out, t0)
    return out


def random_positive_type(E: GroundedSet, dim: int, seed) -> PartialPositiveType:
    """g(t) = <pi(t) xi, xi> for a random dim-dimensional unitary rep pi and a
    random unit vector xi, restricted to E^-1E. Deterministic given seed."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    rep = random_rep(E.spec, dim, rng)
    xi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    xi /= np.linalg.norm(xi)
    dom = double_set(E)
    raw = {w: complex(np.vdot(xi, rep_matrix(rep, w) @ xi)) for w in dom}
    # enforce exact hermitian symmetry against floating point drift; the unit
    # value is <xi, xi> = 1 up to rounding and is pinned exactly
    vals = {w: 0.5 * (raw[w] + raw[inverse(w)].conjugate()) for w in dom}
    vals[unit(E.spec)] = complex(1.0, 0.0)
    return partial_positive_type(E, vals)
