"""Quantum correlation sets for two parties with d settings and m outcomes:
exact tensor-model points from explicit PVMs, see-saw inner bounds, and outer
bounds from the positive-type moment hierarchy over Z_m^{*d} x Z_m^{*d}.

The outer bound and the correlation tensor are tied together by the Fourier
correspondence between the minimal projections of l_inf^m and the cyclic
generator: p_i = (1/m) sum_v omega^{-iv} s^v, so

    gamma[k,l,i,j] = (1/m^2) sum_{v,w=1..m} omega^(-iv-jw) h(s_k^v t_l^w)

for the state h of the moment matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .denselin import eigh, psd_floor, sqrt_psd
from .sdpcore import AffineConstraint, SdpInstance, maximize
from .words import (
    GroupSpec,
    Word,
    cyclic_free_product,
    direct_product,
    generator,
    inverse,
    multiply,
    pair_word,
    sort_key,
    unit,
)

__all__ = [
    "BellScenario",
    "PvmFamily",
    "Correlation",
    "BellFunctional",
    "correlation_of",
    "outer_bound",
    "inner_bound",
    "naimark_dilate",
    "hierarchy_words",
    "moment_instance",
    "pvm_unitary",
]

PVM_TOL = 1e-9
OUTER_DEFAULT_TOL = 2e-7


@dataclass(frozen=True)
class BellScenario:
    """d settings per party, m outcomes per setting."""

    d: int
    m: int

    def __post_init__(self):
        if self.d < 1 or self.m < 2:
            raise ValueError("need d >= 1 and m >= 2")

    @property
    def omega(self) -> complex:
        return np.exp(2j * np.pi / self.m)


@dataclass
class PvmFamily:
    """One m-outcome projective measurement per setting on a common space."""

    dim: int
    settings: list[list[np.ndarray]]

    def __post_init__(self):
        eye = np.eye(self.dim)
        for pvm in self.settings:
            total = np.zeros((self.dim, self.dim), dtype=complex)
            for P in pvm:
                if P.shape != (self.dim, self.dim):
                    raise ValueError("projection dimension mismatch")
                if np.max(np.abs(P - P.conj().T)) > PVM_TOL:
                    raise ValueError("effect is not hermitian")
                if np.max(np.abs(P @ P - P)) > PVM_TOL:
                    raise ValueError("effect is not idempotent")
                total += P
            if np.max(np.abs(total - eye)) > PVM_TOL:
                raise ValueError("effects do not sum to the identity")


@dataclass
class Correlation:
    """gamma[k][l][i][j] = joint outcome probabilities, one row per setting
    pair."""

    data: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.data, dtype=float)
        d, d2, m, m2 = g.shape
        if d != d2 or m != m2:
            raise ValueError("correlation tensor must be d x d x m x m")
        if np.min(g) < -1e-10:
            raise ValueError("negative probability entry")
        sums = g.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1.0)) > 1e-9:
            raise ValueError("outcome distributions do not normalize")
        margA = g.sum(axis=3)  # [k, l, i]
        if np.max(np.abs(margA - margA[:, :1, :])) > 1e-9:
            raise ValueError("A-marginals depend on B's setting")
        margB = g.sum(axis=2)  # [k, l, j]
        if np.max(np.abs(margB - margB[:1, :, :])) > 1e-9:
            raise ValueError("B-marginals depend on A's setting")
        object.__setattr__(self, "data", g)


@dataclass(frozen=True)
class BellFunctional:
    """Linear functional sum c[k][l][i][j] * gamma[k][l][i][j]."""

    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=float)
        if c.ndim != 4 or c.shape[0] != c.shape[1] or c.shape[2] != c.shape[3]:
            raise ValueError("coefficient tensor must be d x d x m x m")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeff", c)

    @property
    def scenario(self) -> BellScenario:
        return BellScenario(self.coeff.shape[0], self.coeff.shape[2])

    def value(self, corr: Correlation) -> float:
        return float(np.sum(self.coeff * corr.data))

    @staticmethod
    def from_correlators(w) -> "BellFunctional":
        """Two-outcome correlator functional sum w[k][l] <A_k B_l> with
        outcomes valued (-1, +1)."""
        w = np.asarray(w, dtype=float)
        d = w.shape[0]
        c = np.zeros((d, d, 2, 2))
        for k in range(d):
            for l in range(d):
                for i in range(2):
                    for j in range(2):
                        c[k][l][i][j] = w[k][l] * ((-1) ** (i + j))
        return BellFunctional(c)


def correlation_of(A: PvmFamily, B: PvmFamily, xi: np.ndarray) -> Correlation:
    """gamma[k][l][i][j] = <(P_i^k (x) Q_j^l) xi, xi> for a unit vector xi on
    the tensor product space."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    if xi.size != A.dim * B.dim:
        raise ValueError("state dimension does not match the PVM spaces")
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("state vector is not normalized")
    dA, dB = len(A.settings), len(B.settings)
    m = len(A.settings[0])
    Xi = xi.reshape(A.dim, B.dim)
    K = [[Xi @ Q.T @ Xi.conj().T for Q in pvm] for pvm in B.settings]
    g = np.empty((dA, dB, m, m))
    for k, pvm in enumerate(A.settings):
        for i, P in enumerate(pvm):
            for l in range(dB):
                for j in range(m):
                    val = complex(np.trace(P @ K[l][j]))
                    g[k][l][i][j] = val.real
    return Correlation(g)


def pvm_unitary(pvm: list[np.ndarray], omega: complex) -> np.ndarray:
    """The order-m unitary sum_i omega^i P_i attached to an m-outcome PVM."""
    U = np.zeros_like(pvm[0])
    for i, P in enumerate(pvm, start=1):
        U = U + (omega ** i) * P
    return U


def _product_spec(s: BellScenario) -> GroupSpec:
    cyc = cyclic_free_product(s.d, s.m)
    return direct_product(cyc, cyc)


def _base_words(cyc: GroupSpec, syllables: int) -> list[Word]:
    """All reduced words of Z_m^{*d} with at most the given syllable count."""
    out = [unit(cyc)]
    frontier = [unit(cyc)]
    for _ in range(syllables):
        new = []
        for w in frontier:
            last = w.letters[-1][0] if w.letters else 0
            for gen in range(1, cyc.d + 1):
                if gen == last:
                    continue
                for e in range(1, cyc.m):
                    new.append(multiply(w, generator(cyc, gen, e)))
        out.extend(new)
        frontier = new
    return out


def hierarchy_words(s: BellScenario, level) -> list[Word]:
    """The index set E_n of the moment matrix.

    Level 1: unit, (s_k^v, 1), (1, t_l^w). Level "1ab" adds (s_k^v, t_l^w).
    Integer level n: all pairs with total syllable count at most n.
    """
    spec = _product_spec(s)
    cyc = spec.left
    lvl = str(level).lower().replace("+", "")
    if lvl == "1ab":
        singles = [w for w in _base_words(cyc, 1) if not w.is_unit]
        words = [unit(spec)]
        words += [pair_word(spec, x, unit(cyc)) for x in singles]
        words += [pair_word(spec, unit(cyc), y) for y in singles]
        words += [pair_word(spec, x, y) for x in singles for y in singles]
    else:
        n = int(lvl)
        if n < 1:
            raise ValueError("level must be >= 1")
        words = []
        left = _base_words(cyc, n)
        for x in left:
            nx = len(x.letters)
            for y in _base_words(cyc, n - nx):
                words.append(pair_word(spec, x, y))
    return sorted(set(words), key=sort_key)


def moment_instance(s: BellScenario, functional: BellFunctional, level):
    """The hierarchy SDP: moment matrix over E_n with h(1) = 1, entries tied
    on equal quotients, and the Fourier-transformed functional as objective."""
    E = hierarchy_words(s, level)
    n = len(E)
    classes: dict[Word, list[tuple[int, int]]] = {}
    for i, x in enumerate(E):
        xi = inverse(x)
        for j, y in enumerate(E):
            classes.setdefault(multiply(xi, y), []).append((i, j))

    constraints = []
    for q, pairs in classes.items():
        if q.is_unit:
            for (i, j) in pairs:
                constraints.append(AffineConstraint(((i, j, 1.0),), 1.0))
            continue
        i0, j0 = pairs[0]
        for (i, j) in pairs[1:]:
            constraints.append(
                AffineConstraint(((i, j, 1.0), (i0, j0, -1.0)), 0.0))

    spec = _product_spec(s)
    cyc = spec.left
    omega = s.omega
    obj: dict[tuple[int, int], complex] = {}
    c = functional.coeff
    for k in range(s.d):
        for l in range(s.d):
            for i in range(s.m):
                for j in range(s.m):
                    coef = c[k][l][i][j]
                    if coef == 0.0:
                        continue
                    for v in range(1, s.m + 1):
                        for w in range(1, s.m + 1):
                            target = pair_word(
                                spec,
                                generator(cyc, k + 1, v % s.m),
                                generator(cyc, l + 1, w % s.m))
                            weight = (coef / s.m ** 2
                                      * omega ** (-(i + 1) * v - (j + 1) * w))
                            r0, c0 = classes[target][0]
                            obj[(r0, c0)] = obj.get((r0, c0), 0j) + weight
    objective = tuple((r, c0, coef) for (r, c0), coef in sorted(obj.items()))
    return SdpInstance(n, constraints, objective), E


def outer_bound(s: BellScenario, functional: BellFunctional, level,
                tol: float = OUTER_DEFAULT_TOL, return_info: bool = False):
    """Upper bound on the functional over commuting-model correlations via
    the level-indexed moment relaxation."""
    inst, E = moment_instance(s, functional, level)
    # the trivial character h = 1 is always feasible
    ones = np.ones((inst.n, inst.n), dtype=complex)
    assert psd_floor(ones) >= -1e-12
    res = maximize(inst, tol=tol)
    value = 0.5 * (res.bracket[0] + res.bracket[1])
    if return_info:
        info = {
            "matrix_size": inst.n,
            "iterations": res.iterations,
            "bracket": [res.bracket[0], res.bracket[1]],
            "psd_floor": psd_floor(res.b),
        }
        return value, info
    return value


def naimark_dilate(povm: list[np.ndarray]) -> tuple[PvmFamily, np.ndarray]:
    """Dilate a POVM (PSD effects summing to I on dim n) to a PVM on dim m*n:
    V x = sum_i e_i (x) (M_i^(1/2) x) and P_i the i-th block projector."""
    m = len(povm)
    n = povm[0].shape[0]
    total = np.zeros((n, n), dtype=complex)
    for M in povm:
        if psd_floor(M) < -PVM_TOL:
            raise ValueError("effect is not PSD within tolerance")
        total += M
    if np.max(np.abs(total - np.eye(n))) > PVM_TOL:
        raise ValueError("effects do not sum to the identity")
    V = np.vstack([sqrt_psd(M, tol=PVM_TOL) for M in povm])
    if np.max(np.abs(V.conj().T @ V - np.eye(n))) > PVM_TOL:
        raise ValueError("dilation isometry check failed")
    projections = []
    for i in range(m):
        P = np.zeros((m * n, m * n), dtype=complex)
        P[i * n:(i + 1) * n, i * n:(i + 1) * n] = np.eye(n)
        projections.append(P)
    return PvmFamily(m * n, [projections]), V


def _round_to_pvm(povm: list[np.ndarray]) -> list[np.ndarray]:
    """Eigen-rounding: collect each effect's >= 1/2 eigenvectors, orthogonalize
    them in order, and hand leftover directions to the best-scoring effect."""
    n = povm[0].shape[0]
    m = len(povm)
    basis: list[np.ndarray] = []
    owner: list[int] = []

    def orthogonalize(v):
        for u in basis:
            v = v - u * np.vdot(u, v)
        return v

    for i, M in enumerate(povm):
        w, U = eigh(M)
        for k in range(len(w) - 1, -1, -1):
            if w[k] < 0.5:
                break
            v = orthogonalize(U[:, k])
            norm = np.linalg.norm(v)
            if norm >= 0.5:
                basis.append(v / norm)
                owner.append(i)
    if len(basis) < n:
        # orthonormal complement of the accepted vectors
        acc = np.zeros((n, n), dtype=complex)
        for u in basis:
            acc += np.outer(u, u.conj())
        w, U = eigh(np.eye(n) - acc)
        for k in range(len(w) - 1, -1, -1):
            if len(basis) == n or w[k] < 0.5:
                break
            v = orthogonalize(U[:, k])
            norm = np.linalg.norm(v)
            if norm < 1e-8:
                continue
            v = v / norm
            scores = [float(np.vdot(v, M @ v).real) for M in povm]
            basis.append(v)
            owner.append(int(np.argmax(scores)))
    out = [np.zeros((n, n), dtype=complex) for _ in range(m)]
    for u, i in zip(basis, owner):
        out[i] += np.outer(u, u.conj())
    return out


def _pvmify(povm: list[np.ndarray]) -> list[np.ndarray]:
    """Restore PVM form after a POVM optimization step: dilate (which also
    validates the POVM) and eigen-round the compressed effects into exact
    projections. Rounding is idempotent on families that are already
    projective."""
    naimark_dilate([0.5 * (M + M.conj().T) for M in povm])
    return _round_to_pvm(povm)


def _update_two_outcome(G1: np.ndarray, G2: np.ndarray) -> list[np.ndarray]:
    """Exact maximizer of tr(G1 M) + tr(G2 (I - M)) over 0 <= M <= I: the
    spectral projector onto the positive part of G1 - G2."""
    w, U = eigh(G1 - G2)
    keep = U[:, w > 0.0]
    P1 = keep @ keep.conj().T
    return [P1, np.eye(P1.shape[0]) - P1]


def _update_povm_sdp(G: list[np.ndarray], tol: float) -> list[np.ndarray]:
    """POVM relaxation for m >= 3 outcomes: maximize sum_i tr(G_i M_i) over
    M_i >= 0, sum M_i = I, via a block-diagonal SDP."""
    m = len(G)
    n = G[0].shape[0]
    N = m * n
    constraints = []
    # off-diagonal blocks vanish
    for bi in range(m):
        for bj in range(m):
            if bi == bj:
                continue
            for a in range(n):
                for b in range(n):
                    if bi < bj or a != b:  # hermitian closure adds the rest
                        constraints.append(AffineConstraint(
                            ((bi * n + a, bj * n + b, 1.0),), 0.0))
    # blocks sum to the identity
    for a in range(n):
        for b in range(n):
            entries = tuple((bi * n + a, bi * n + b, 1.0) for bi in range(m))
            constraints.append(AffineConstraint(entries,
                                                1.0 if a == b else 0.0))
    objective = []
    for bi in range(m):
        for a in range(n):
            for b in range(n):
                coef = G[bi][a, b]
                if abs(coef) > 1e-15:
                    objective.append((bi * n + a, bi * n + b, complex(coef)))
    inst = SdpInstance(N, constraints, tuple(objective))
    # tight feasibility slack keeps the blocks inside the dilation tolerance
    res = maximize(inst, tol=tol, feas_tol=1e-10)
    return [np.array(res.b[bi * n:(bi + 1) * n, bi * n:(bi + 1) * n])
            for bi in range(m)]


def _bell_operator(functional: BellFunctional, A: PvmFamily, B: PvmFamily):
    c = functional.coeff
    d, m = c.shape[0], c.shape[2]
    W = np.zeros((A.dim * B.dim, A.dim * B.dim), dtype=complex)
    for k in range(d):
        for l in range(d):
            for i in range(m):
                for j in range(m):
                    if c[k][l][i][j] != 0.0:
                        W += c[k][l][i][j] * np.kron(A.settings[k][i],
                                                     B.settings[l][j])
    return W


def _top_state(W: np.ndarray) -> np.ndarray:
    w, U = eigh(W)
    xi = U[:, -1]
    return xi / np.linalg.norm(xi)


def _random_pvm_family(dim: int, s: BellScenario, rng) -> PvmFamily:
    settings = []
    for _ in range(s.d):
        Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        Q, _ = np.linalg.qr(Z)
        perm = rng.permutation(dim)
        effects = [np.zeros((dim, dim), dtype=complex) for _ in range(s.m)]
        for pos, col in enumerate(perm):
            if dim == 1:
                # projections on C^1 are exactly 0 or 1; avoid phase rounding
                effects[pos % s.m][0, 0] = 1.0
            else:
                v = Q[:, col]
                effects[pos % s.m] += np.outer(v, v.conj())
        settings.append(effects)
    return PvmFamily(dim, settings)


def _effect_multipliers(functional, other: PvmFamily, Xi, party: str):
    """G_i^(k): hermitian matrices so that the party's objective is
    sum_{k,i} tr(P_i^(k) G_i^(k)) at fixed state and fixed other party."""
    c = functional.coeff
    d, m = c.shape[0], c.shape[2]
    G = [[None] * m for _ in range(d)]
    if party == "A":
        K = [[Xi @ Q.T @ Xi.conj().T for Q in pvm] for pvm in other.settings]
        for k in range(d):
            for i in range(m):
                acc = np.zeros_like(K[0][0])
                for l in range(d):
                    for j in range(m):
                        acc += c[k][l][i][j] * K[l][j]
                G[k][i] = 0.5 * (acc + acc.conj().T)
    else:
        K = [[Xi.T @ P.T @ Xi.conj() for P in pvm] for pvm in other.settings]
        for l in range(d):
            for j in range(m):
                acc = np.zeros_like(K[0][0])
                for k in range(d):
                    for i in range(m):
                        acc += c[k][l][i][j] * K[k][i]
                G[l][j] = 0.5 * (acc + acc.conj().T)
    return G


def inner_bound(s: BellScenario, functional: BellFunctional, dim: int,
                iters: int = 50, seed=0, restarts: int = 8):
    """See-saw lower bound over tensor-model strategies on dim x dim.

    Alternates the state step (top eigenvector of the Bell operator) with
    per-setting measurement updates (POVM relaxation, restored to PVM form);
    updates are accepted only when the exactly re-evaluated value does not
    decrease. Returns (value, A, B, xi) for the best run.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([int(seed), r])
        A = _random_pvm_family(dim, s, rng)
        B = _random_pvm_family(dim, s, rng)
        xi = _top_state(_bell_operator(functional, A, B))
        value = functional.value(correlation_of(A, B, xi))
        for _ in range(iters):
            improved = False
            for party in ("A", "B"):
                other = B if party == "A" else A
                Xi = xi.reshape(A.dim, B.dim)
                G = _effect_multipliers(functional, other, Xi, party)
                new_settings = []
                for k in range(s.d):
                    if s.m == 2:
                        new_povm = _update_two_outcome(G[k][0], G[k][1])
                    else:
                        new_povm = _update_povm_sdp(G[k], tol=1e-6)
                    new_settings.append(_pvmify(new_povm))
                candidate = PvmFamily(dim, new_settings)
                if party == "A":
                    W = _bell_operator(functional, candidate, B)
                    xi_new = _top_state(W)
                    val_new = functional.value(
                        correlation_of(candidate, B, xi_new))
                    if val_new > value + 1e-12:
                        A, xi, value = candidate, xi_new, val_new
                        improved = True
                else:
                    W = _bell_operator(functional, A, candidate)
                    xi_new = _top_state(W)
                    val_new = functional.value(
                        correlation_of(A, candidate, xi_new))
                    if val_new > value + 1e-12:
                        B, xi, value = candidate, xi_new, val_new
                        improved = True
            if not improved:
                break
        if best is None or value > best[0]:
            best = (value, A, B, xi)
    return best
