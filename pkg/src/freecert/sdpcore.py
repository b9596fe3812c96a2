"""Small dense semidefinite feasibility and linear optimization over affine
sections of the PSD cone.

Feasibility runs Douglas-Rachford projection splitting between the PSD cone
(eigenvalue clipping) and the affine subspace (orthogonal projection via a
precomputed SVD of the constraint system); the affine projection of the cone
shadow is the reported iterate. Plain Dykstra-corrected alternating
projections only reach O(1/k) PSD floors on near-tangent moment instances,
which is why the reflected update is used. Optimization bisects on the
objective level set, reusing the feasibility engine with one extra constraint
row per level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AffineConstraint",
    "SdpInstance",
    "FeasibilityResult",
    "MaximizeResult",
    "SdpError",
    "InconsistentConstraintsError",
    "InfeasibleError",
    "UnboundedError",
    "solve_feasibility",
    "maximize",
    "instance_to_json",
]

DEFAULT_FEAS_TOL = 1e-9
DEFAULT_OPT_TOL = 1e-6
DEFAULT_MAX_ITER = 200_000


class SdpError(Exception):
    pass


class InconsistentConstraintsError(SdpError):
    """The affine system alone has no solution."""


class InfeasibleError(SdpError):
    pass


class UnboundedError(SdpError):
    pass


@dataclass(frozen=True)
class AffineConstraint:
    """sum over (row, col, coeff) of coeff * b[row, col] == rhs."""

    entries: tuple[tuple[int, int, complex], ...]
    rhs: complex

    def __post_init__(self):
        merged: dict[tuple[int, int], complex] = {}
        for r, c, coef in self.entries:
            merged[(r, c)] = merged.get((r, c), 0j) + complex(coef)
        object.__setattr__(
            self, "entries",
            tuple((r, c, coef) for (r, c), coef in sorted(merged.items())))
        object.__setattr__(self, "rhs", complex(self.rhs))


@dataclass
class SdpInstance:
    n: int
    constraints: list[AffineConstraint] = field(default_factory=list)
    objective: tuple[tuple[int, int, complex], ...] = ()


@dataclass
class FeasibilityResult:
    feasible: bool
    b: np.ndarray | None
    psd_residual: float
    affine_residual: float
    iterations: int
    message: str = ""


@dataclass
class MaximizeResult:
    value: float
    b: np.ndarray
    iterations: int
    bracket: tuple[float, float]


class _HermitianVec:
    """Isometric real parametrization of hermitian n x n matrices:
    [diag; sqrt2*Re upper; sqrt2*Im upper]."""

    def __init__(self, n: int):
        self.n = n
        self.iu = np.triu_indices(n, 1)
        self.k = len(self.iu[0])
        self.dim = n + 2 * self.k
        self.pos = {(int(i), int(j)): p
                    for p, (i, j) in enumerate(zip(*self.iu))}
        self._s2 = np.sqrt(2.0)

    def vec(self, M: np.ndarray) -> np.ndarray:
        v = np.empty(self.dim)
        v[:self.n] = np.diagonal(M).real
        upper = M[self.iu]
        v[self.n:self.n + self.k] = self._s2 * upper.real
        v[self.n + self.k:] = self._s2 * upper.imag
        return v

    def unvec(self, v: np.ndarray) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=complex)
        M[np.arange(self.n), np.arange(self.n)] = v[:self.n]
        upper = (v[self.n:self.n + self.k] + 1j * v[self.n + self.k:]) / self._s2
        M[self.iu] = upper
        M[self.iu[1], self.iu[0]] = upper.conj()
        return M

    def constraint_rows(self, con: AffineConstraint):
        """Realify one complex constraint into up to two real rows."""
        row_re = np.zeros(self.dim)
        row_im = np.zeros(self.dim)
        for r, c, coef in con.entries:
            if not (0 <= r < self.n and 0 <= c < self.n):
                raise ValueError("constraint index out of range")
            if r == c:
                row_re[r] += coef.real
                row_im[r] += coef.imag
            else:
                i, j = (r, c) if r < c else (c, r)
                s = 1.0 if r < c else -1.0
                px = self.n + self.pos[(i, j)]
                py = self.n + self.k + self.pos[(i, j)]
                row_re[px] += coef.real / self._s2
                row_re[py] += -s * coef.imag / self._s2
                row_im[px] += coef.imag / self._s2
                row_im[py] += s * coef.real / self._s2
        rows, rhs = [], []
        for row, val in ((row_re, con.rhs.real), (row_im, con.rhs.imag)):
            if np.max(np.abs(row)) > 1e-14 or abs(val) > 1e-14:
                rows.append(row)
                rhs.append(val)
        return rows, rhs

    def objective_vec(self, objective) -> np.ndarray:
        """Realified gradient of b -> Re sum coef * b[row, col] (the same
        entrywise reading as AffineConstraint)."""
        C = np.zeros((self.n, self.n), dtype=complex)
        for r, c, coef in objective:
            C[r, c] += np.conj(coef)
        C = 0.5 * (C + C.conj().T)
        return self.vec(C)


class _AffineProjector:
    """Orthogonal projection onto {x : Lx = r} with a rank-revealing SVD."""

    def __init__(self, L: np.ndarray, rhs: np.ndarray):
        self.L = L
        self.rhs = rhs
        if L.shape[0] == 0:
            self.rank = 0
            self.Q = np.zeros((L.shape[1], 0))
            self.x0 = np.zeros(L.shape[1])
            return
        U, S, Vt = np.linalg.svd(L, full_matrices=False)
        cut = (S[0] * 1e-12) if S.size and S[0] > 0 else 0.0
        self.rank = int(np.sum(S > cut))
        self.Q = Vt[:self.rank].T
        self._U = U[:, :self.rank]
        self._S = S[:self.rank]
        self.x0 = self.Q @ ((self._U.T @ rhs) / self._S)
        resid = float(np.max(np.abs(L @ self.x0 - rhs)))
        if resid > 1e-8 * (1.0 + float(np.max(np.abs(rhs)))):
            raise InconsistentConstraintsError(
                f"affine system is inconsistent (residual {resid:g})")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.rank == 0:
            return x
        return x - self.Q @ (self.Q.T @ x) + self.x0

    def residual(self, x: np.ndarray) -> float:
        if self.L.shape[0] == 0:
            return 0.0
        return float(np.max(np.abs(self.L @ x - self.rhs)))


def _build_system(hv: _HermitianVec, constraints):
    rows, rhs = [], []
    for con in constraints:
        r, v = hv.constraint_rows(con)
        rows.extend(r)
        rhs.extend(v)
    if rows:
        return np.array(rows), np.array(rhs)
    return np.zeros((0, hv.dim)), np.zeros(0)


def _project_psd_vec(hv: _HermitianVec, v: np.ndarray):
    M = hv.unvec(v)
    w, U = np.linalg.eigh(M)
    clipped = (U * np.maximum(w, 0.0)) @ U.conj().T
    return hv.vec(clipped)


def _min_eig_vec(hv: _HermitianVec, v: np.ndarray) -> float:
    M = hv.unvec(v)
    return float(np.linalg.eigvalsh(M)[0])


# stall detection: every CHECK_EVERY iterations the PSD floor of the
# affine-exact iterate is measured; if the best floor improves by less than
# STALL_REL over STALL_WINDOW consecutive checks the solve is abandoned
CHECK_EVERY = 25
STALL_WINDOW = 40
STALL_REL = 1e-3
MIN_ITER_BEFORE_STALL = 2000

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None


def _splitting_python(Q, x0, n, iu_i, iu_j, tol, max_iter, start):
    hv = _HermitianVec(n)

    def affine(v):
        return v - Q @ (Q.T @ v) + x0

    z = start.copy()
    best_floor = -np.inf
    best_x = affine(_project_psd_vec(hv, z))
    window: list[float] = []
    it = 0
    while it < max_iter:
        it += 1
        y = _project_psd_vec(hv, z)
        z = z + affine(2.0 * y - z) - y
        if it % CHECK_EVERY == 0 or it == max_iter:
            x = affine(y)
            floor = _min_eig_vec(hv, x)
            if floor > best_floor:
                best_floor = floor
                best_x = x.copy()
            if best_floor >= -tol:
                break
            window.append(best_floor)
            if len(window) > STALL_WINDOW:
                window.pop(0)
                if (it >= MIN_ITER_BEFORE_STALL
                        and window[-1] - window[0]
                        < STALL_REL * abs(window[0])):
                    break
    return best_x, best_floor, it


if _numba is not None:

    @_numba.njit(cache=True)
    def _splitting_compiled(Q, x0, n, iu_i, iu_j, tol, max_iter, start,
                            check_every, stall_window, stall_rel,
                            min_iter_stall):  # pragma: no cover - jitted
        dim = x0.shape[0]
        k = iu_i.shape[0]
        s2 = np.sqrt(2.0)
        z = start.copy()
        best_floor = -1e300
        best_x = x0.copy()
        have_best = False
        window = np.empty(stall_window)
        wlen = 0
        it = 0
        M = np.zeros((n, n), dtype=np.complex128)
        y = np.empty(dim)
        while it < max_iter:
            it += 1
            for a in range(n):
                M[a, a] = z[a]
            for q in range(k):
                i, j = iu_i[q], iu_j[q]
                zz = (z[n + q] + 1j * z[n + k + q]) / s2
                M[i, j] = zz
                M[j, i] = np.conj(zz)
            w, U = np.linalg.eigh(M)
            Uc = U * np.sqrt(np.maximum(w, 0.0))
            C = Uc @ Uc.conj().T
            for a in range(n):
                y[a] = C[a, a].real
            for q in range(k):
                zz = C[iu_i[q], iu_j[q]]
                y[n + q] = s2 * zz.real
                y[n + k + q] = s2 * zz.imag
            refl = 2.0 * y - z
            pa = refl - Q @ (Q.T @ refl) + x0
            z = z + pa - y
            if it % check_every == 0 or it == max_iter:
                x = y - Q @ (Q.T @ y) + x0
                for a in range(n):
                    M[a, a] = x[a]
                for q in range(k):
                    i, j = iu_i[q], iu_j[q]
                    zz = (x[n + q] + 1j * x[n + k + q]) / s2
                    M[i, j] = zz
                    M[j, i] = np.conj(zz)
                wx = np.linalg.eigvalsh(M)
                floor = wx[0]
                if floor > best_floor or not have_best:
                    best_floor = floor
                    best_x = x.copy()
                    have_best = True
                if best_floor >= -tol:
                    break
                if wlen < stall_window:
                    window[wlen] = best_floor
                    wlen += 1
                else:
                    for a in range(stall_window - 1):
                        window[a] = window[a + 1]
                    window[stall_window - 1] = best_floor
                    if (it >= min_iter_stall
                            and window[stall_window - 1] - window[0]
                            < stall_rel * abs(window[0])):
                        break
        return best_x, best_floor, it


def _splitting(hv, projector, tol, max_iter, start_vec=None):
    start = (projector.apply(start_vec) if start_vec is not None
             else projector.x0.copy())
    iu_i = hv.iu[0].astype(np.int64)
    iu_j = hv.iu[1].astype(np.int64)
    if _numba is not None:
        return _splitting_compiled(
            projector.Q, projector.x0, hv.n, iu_i, iu_j, float(tol),
            int(max_iter), start, CHECK_EVERY, STALL_WINDOW, STALL_REL,
            MIN_ITER_BEFORE_STALL)
    return _splitting_python(projector.Q, projector.x0, hv.n, iu_i, iu_j,
                             tol, max_iter, start)


def solve_feasibility(inst: SdpInstance, tol: float = DEFAULT_FEAS_TOL,
                      max_iter: int = DEFAULT_MAX_ITER,
                      start: np.ndarray | None = None) -> FeasibilityResult:
    """Find b >= 0 satisfying every affine constraint within tol, or report
    the best residuals reached.

    Raises InconsistentConstraintsError when the affine system alone is
    unsolvable (distinct from PSD infeasibility, which yields a non-feasible
    result).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    hv = _HermitianVec(inst.n)
    L, rhs = _build_system(hv, inst.constraints)
    projector = _AffineProjector(L, rhs)
    start_vec = hv.vec(np.asarray(start, dtype=complex)) if start is not None else None
    x, floor, it = _splitting(hv, projector, tol, max_iter, start_vec)
    b = hv.unvec(x)
    psd_res = max(0.0, -floor)
    aff_res = projector.residual(x)
    ok = psd_res <= tol and aff_res <= tol
    msg = "" if ok else "no PSD point found within tolerance"
    return FeasibilityResult(ok, b, psd_res, aff_res, it, msg)


def _feasibility_with_level(hv, base_L, base_rhs, obj_vec, level, tol,
                            max_iter, start_vec):
    L = np.vstack([base_L, obj_vec[None, :]])
    rhs = np.append(base_rhs, level)
    try:
        projector = _AffineProjector(L, rhs)
    except InconsistentConstraintsError:
        return None, -np.inf, 0
    x, floor, it = _splitting(hv, projector, tol, max_iter, start_vec)
    if floor >= -tol and projector.residual(x) <= tol:
        return x, floor, it
    return None, floor, it


def maximize(inst: SdpInstance, tol: float = DEFAULT_OPT_TOL,
             feas_tol: float | None = None,
             max_iter: int = 60_000) -> MaximizeResult:
    """Maximize Re sum coef * b[row, col] over the feasible region by
    bisection on the objective level set.

    The feasible region must be nonempty and bounded in the objective
    direction; unboundedness is reported once the level exceeds 1/tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if feas_tol is None:
        feas_tol = min(DEFAULT_FEAS_TOL, tol * 1e-3)
    hv = _HermitianVec(inst.n)
    base_L, base_rhs = _build_system(hv, inst.constraints)
    obj_vec = hv.objective_vec(inst.objective)

    base = solve_feasibility(inst, tol=feas_tol, max_iter=max_iter)
    total_iter = base.iterations
    if not base.feasible:
        raise InfeasibleError("no feasible point found for the base instance")
    x_lo = hv.vec(base.b)
    t_lo = float(obj_vec @ x_lo)

    if np.max(np.abs(obj_vec)) < 1e-15:
        return MaximizeResult(0.0, base.b, total_iter, (0.0, 0.0))

    # expand upward from the feasible value until a level is rejected
    step = max(1.0, abs(t_lo))
    t_hi = None
    warm = x_lo
    while t_hi is None:
        cand = t_lo + step
        x, floor, it = _feasibility_with_level(
            hv, base_L, base_rhs, obj_vec, cand, feas_tol, max_iter, warm)
        total_iter += it
        if x is not None:
            t_lo, x_lo, warm = cand, x, x
            step *= 2.0
            if t_lo > 1.0 / tol:
                raise UnboundedError("objective exceeds 1/tol; unbounded?")
        else:
            t_hi = cand

    while t_hi - t_lo > tol:
        mid = 0.5 * (t_lo + t_hi)
        x, floor, it = _feasibility_with_level(
            hv, base_L, base_rhs, obj_vec, mid, feas_tol, max_iter, warm)
        total_iter += it
        if x is not None:
            t_lo, x_lo, warm = mid, x, x
        else:
            t_hi = mid

    return MaximizeResult(t_lo, hv.unvec(x_lo), total_iter, (t_lo, t_hi))


def instance_to_json(inst: SdpInstance) -> dict:
    return {
        "n": inst.n,
        "constraints": [
            {"entries": [[r, c, coef.real, coef.imag]
                         for r, c, coef in con.entries],
             "rhs": [con.rhs.real, con.rhs.imag]}
            for con in inst.constraints
        ],
        "objective": [[r, c, coef.real, coef.imag]
                      for r, c, coef in inst.objective],
    }
