"""Sum-of-hermitian-squares certificates, tracial certificates, and
representation-based falsifiers for hermitian group algebra elements.

A certificate factors f + eps*delta_1 as sum_i xi_i^* * xi_i with supp xi_i
inside a grounded set E. The Gram matrix b over E is found by SDP
feasibility (the diagonal-sum constraints sum_{s^-1 t = a} b[s,t] = f(a) are
the constructive replacement for the completely-positive extension step), and
every certificate is re-verified by exact symbolic convolution, independent
of the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    FiniteRep,
    GroupAlgebraElement,
    convolve,
    delta,
    element,
    eval_rep,
    involve,
    random_rep,
    tensor_rep,
    zero,
)
from .denselin import eigh, psd_floor
from .grounded import GroundedSet, double_set
from .sdpcore import (
    AffineConstraint,
    SdpInstance,
    solve_feasibility,
)
from .words import Word, conjugacy_canonical, inverse, multiply, sort_key, unit

__all__ = [
    "SosCertificate",
    "TraceCertificate",
    "NotCertified",
    "FalsifyReport",
    "certify_sos",
    "verify_sos",
    "certify_trace",
    "verify_trace",
    "dilate_contraction",
    "falsify",
    "certificate_to_json",
    "certificate_from_json",
]

RANK_CUTOFF = 1e-10


@dataclass
class SosCertificate:
    """Factorization witness: f + epsilon*delta_1 = sum_i xi_i^* * xi_i."""

    E: GroundedSet
    epsilon: float
    gram: np.ndarray
    factors: list[GroupAlgebraElement]
    residual: float


@dataclass
class TraceCertificate(SosCertificate):
    """Tracial witness: every conjugacy class sum of f + epsilon*delta_1
    matches the class sum of sum_i xi_i^* * xi_i."""

    class_residuals: dict[Word, complex] = field(default_factory=dict)


@dataclass
class NotCertified:
    psd_residual: float
    affine_residual: float
    iterations: int
    message: str = ""


@dataclass
class FalsifyReport:
    worst: float
    witness: FiniteRep
    samples: int
    mode: str


def _check_hermitian(f: GroupAlgebraElement):
    if not f.is_hermitian():
        raise ValueError("element is not hermitian")


def _gram_instance(E, constraints_for):
    """Gram SDP over E: one affine constraint per right-hand-side key."""
    elements = list(E)
    n = len(elements)
    pair_key: dict[tuple[int, int], Word] = {}
    for i, s in enumerate(elements):
        si = inverse(s)
        for j, t in enumerate(elements):
            pair_key[(i, j)] = multiply(si, t)
    groups: dict[Word, list[tuple[int, int]]] = {}
    for (i, j), key in pair_key.items():
        groups.setdefault(constraints_for(key), []).append((i, j))
    return n, groups


def _factor_gram(E, b) -> tuple[list[GroupAlgebraElement], np.ndarray]:
    """Develop b^(1/2) into factor elements: rows with eigenvalue above the
    rank cutoff give xi_i(t) = sqrt(lam_i) * conj(U[t,i])."""
    elements = list(E)
    w, U = eigh(b)
    lam_max = float(w[-1]) if w.size else 0.0
    keep = [k for k in range(len(w)) if w[k] > RANK_CUTOFF * max(lam_max, 0.0)
            and w[k] > 0.0]
    factors = []
    for k in keep:
        coeffs = np.sqrt(w[k]) * U[:, k].conj()
        factors.append(element(E.spec, {t: coeffs[idx]
                                        for idx, t in enumerate(elements)}))
    rebuilt = np.zeros_like(b)
    for k in keep:
        col = U[:, k:k + 1]
        rebuilt += w[k] * (col @ col.conj().T)
    return factors, rebuilt


def _sos_sum(factors, spec) -> GroupAlgebraElement:
    total = zero(spec)
    for xi in factors:
        total = total + convolve(involve(xi), xi)
    return total


def certify_sos(f: GroupAlgebraElement, E: GroundedSet, epsilon: float = 0.0,
                tol: float = 1e-9):
    """Search for a sum-of-hermitian-squares factorization of f + eps*delta_1
    with factors supported in E. Returns an SosCertificate or NotCertified."""
    _check_hermitian(f)
    dom = set(double_set(E))
    outside = [w for w in f.terms if w not in dom]
    if outside:
        raise ValueError(
            f"support not contained in E^-1E: {sorted(map(str, outside))}")
    u = unit(E.spec)

    n, groups = _gram_instance(E, lambda a: a)
    fscale = max(1.0, f.max_coeff() + abs(epsilon))
    constraints = []
    for a, pairs in groups.items():
        rhs = (f.coeff(a) + (epsilon if a == u else 0.0)) / fscale
        constraints.append(AffineConstraint(
            tuple((i, j, 1.0) for i, j in pairs), rhs))
    inst = SdpInstance(n, constraints)
    return _certify(inst, fscale, tol,
                    lambda b: _build_sos(E, epsilon, b, f),
                    "Gram SDP found no PSD solution within tolerance")


def _certify(inst, fscale, tol, build, fail_message):
    """Solve the (normalized) Gram SDP and let the symbolic verifier decide;
    the solver verdict only gates the retry, never the acceptance."""
    solver_tol = max(tol * 1e-2, 1e-13)
    res = solve_feasibility(inst, tol=solver_tol)
    cert = build(fscale * res.b)
    if cert.residual <= tol:
        return cert
    res = solve_feasibility(inst, tol=solver_tol * 1e-2, max_iter=400_000,
                            start=res.b)
    cert = build(fscale * res.b)
    if cert.residual <= tol:
        return cert
    return NotCertified(res.psd_residual * fscale,
                        res.affine_residual * fscale,
                        res.iterations, fail_message)


def _build_sos(E, epsilon, b, f) -> SosCertificate:
    factors, gram = _factor_gram(E, b)
    cert = SosCertificate(E, float(epsilon), gram, factors, residual=np.inf)
    cert.residual = verify_sos(cert, f)
    return cert


def verify_sos(cert: SosCertificate, f: GroupAlgebraElement) -> float:
    """Independent symbolic check: recompute sum_i xi_i^* * xi_i by exact
    convolution and return the max coefficient deviation from
    f + epsilon*delta_1. Never consults the SDP."""
    target = f + delta(unit(f.spec), cert.epsilon)
    diff = _sos_sum(cert.factors, f.spec) - target
    return diff.max_coeff()


def certify_trace(f: GroupAlgebraElement, E: GroundedSet,
                  epsilon: float = 0.0, tol: float = 1e-9):
    """Certify trace positivity: find a Gram matrix whose factorization
    matches f + eps*delta_1 on every conjugacy class sum. Words of supp f
    must be conjugate into E^-1E."""
    _check_hermitian(f)
    dom = double_set(E)
    reachable = {conjugacy_canonical(w) for w in dom}
    unreachable = [w for w in f.terms
                   if conjugacy_canonical(w) not in reachable]
    if unreachable:
        raise ValueError(
            "conjugacy classes of the support are not reachable from E^-1E: "
            f"{sorted(map(str, unreachable))}")
    u = unit(E.spec)
    u_class = conjugacy_canonical(u)

    class_sums: dict[Word, complex] = {}
    for w, c in f.terms.items():
        key = conjugacy_canonical(w)
        class_sums[key] = class_sums.get(key, 0j) + c
    class_sums[u_class] = class_sums.get(u_class, 0j) + epsilon

    n, groups = _gram_instance(E, conjugacy_canonical)
    fscale = max(1.0, f.max_coeff() + abs(epsilon))
    constraints = []
    for key, pairs in groups.items():
        rhs = class_sums.get(key, 0j) / fscale
        constraints.append(AffineConstraint(
            tuple((i, j, 1.0) for i, j in pairs), rhs))
    inst = SdpInstance(n, constraints)
    return _certify(inst, fscale, tol,
                    lambda b: _build_trace(E, epsilon, b, f),
                    "class-sum Gram SDP found no PSD solution")


def _build_trace(E, epsilon, b, f) -> TraceCertificate:
    factors, gram = _factor_gram(E, b)
    cert = TraceCertificate(E, float(epsilon), gram, factors,
                            residual=np.inf)
    cert.class_residuals = verify_trace(cert, f)
    cert.residual = max((abs(v) for v in cert.class_residuals.values()),
                        default=0.0)
    return cert


def verify_trace(cert: SosCertificate, f: GroupAlgebraElement) -> dict[Word, complex]:
    """Symbolic class-sum check: signed residual per conjugacy class of
    f + epsilon*delta_1 - sum_i xi_i^* * xi_i."""
    target = f + delta(unit(f.spec), cert.epsilon)
    diff = target - _sos_sum(cert.factors, f.spec)
    residuals: dict[Word, complex] = {}
    for w, c in diff.terms.items():
        key = conjugacy_canonical(w)
        residuals[key] = residuals.get(key, 0j) + c
    return {k: v for k, v in sorted(residuals.items(),
                                    key=lambda kv: sort_key(kv[0]))}


def dilate_contraction(X: np.ndarray) -> np.ndarray:
    """Choi's unitary dilation of a contraction:

        U = [ X                (1 - XX*)^(1/2) ]
            [ (1 - X*X)^(1/2)  -X*             ]

    Singular values are clipped to 1; a norm above 1 + 1e-6 is an error.
    The upper-left block of U is X itself (bit for bit when no clipping
    occurs)."""
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    p, q = X.shape
    W, sig, Vh = np.linalg.svd(X)
    if sig.size and sig[0] > 1.0 + 1e-6:
        raise ValueError(f"operator norm {sig[0]:g} exceeds 1 + 1e-6")
    clipped = np.minimum(sig, 1.0)
    if sig.size and sig[0] > 1.0:
        X = (W[:, :len(clipped)] * clipped) @ Vh[:len(clipped)]
    # defect square roots via the same SVD triple keeps U unitary to rounding
    r = len(clipped)
    d = np.sqrt(np.maximum(1.0 - clipped ** 2, 0.0))
    DW = W @ np.diag(np.concatenate([d, np.ones(p - r)])) @ W.conj().T
    DV = Vh.conj().T @ np.diag(np.concatenate([d, np.ones(q - r)])) @ Vh
    U = np.block([[X, DW], [DV, -X.conj().T]])
    return U


def _sample_rep(spec, dim, rng, use_dilation):
    # dilations of random compressions explore non-Haar corners of the
    # unitary group; they rarely have finite order, so cyclic and product
    # specs always sample Haar-style
    if use_dilation and spec.kind == "free":
        gens = []
        for _ in range(spec.d):
            Z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            sig = np.linalg.svd(Z, compute_uv=False)[0]
            X = Z / (sig * (1.0 + rng.uniform(0.0, 1.0)))
            gens.append(dilate_contraction(X))
        return FiniteRep(spec, 2 * dim, tuple(gens))
    return random_rep(spec, dim, rng)


def falsify(f: GroupAlgebraElement, mode: str, dims: list[int],
            samples: int, seed) -> FalsifyReport:
    """Sample random finite-dimensional unitary representations and report
    the worst operator floor (mode "operator") or worst normalized trace
    (mode "trace"). A clearly negative worst value disproves membership in
    the archimedean closure of the corresponding cone."""
    if mode not in ("operator", "trace"):
        raise ValueError("mode must be 'operator' or 'trace'")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if not dims:
        raise ValueError("dims must be nonempty")
    worst = np.inf
    witness = None
    for k in range(samples):
        rng = np.random.default_rng([int(seed), k])
        dim = int(dims[k % len(dims)])
        rep = _sample_rep(f.spec, dim, rng, use_dilation=(k % 3 == 2))
        M = eval_rep(f, rep)
        if mode == "operator":
            value = psd_floor(M)
        else:
            value = float(np.trace(M).real) / rep.dim
        if value < worst:
            worst = value
            witness = rep
    return FalsifyReport(float(worst), witness, samples, mode)


def certificate_to_json(cert: SosCertificate) -> dict:
    from .algebra import element_to_json
    from .words import format_word

    out = {
        "support": [format_word(w) for w in cert.E],
        "group": cert.E.spec.to_json(),
        "epsilon": cert.epsilon,
        "gram": [[[z.real, z.imag] for z in row] for row in cert.gram],
        "factors": [element_to_json(xi) for xi in cert.factors],
        "residual": cert.residual,
    }
    if isinstance(cert, TraceCertificate):
        out["kind"] = "trace"
        out["class_residuals"] = {
            format_word(w): [v.real, v.imag]
            for w, v in cert.class_residuals.items()}
    else:
        out["kind"] = "sos"
    return out


def certificate_from_json(obj: dict) -> SosCertificate:
    from .algebra import element_from_json
    from .grounded import grounded_set
    from .words import GroupSpec, parse_word

    spec = GroupSpec.from_json(obj["group"])
    E = grounded_set(spec, {parse_word(spec, s) for s in obj["support"]})
    gram = np.array([[complex(re, im) for re, im in row]
                     for row in obj["gram"]], dtype=complex)
    if gram.size == 0:
        gram = np.zeros((len(E), len(E)), dtype=complex)
    factors = [element_from_json(e) for e in obj["factors"]]
    if obj.get("kind") == "trace":
        cert = TraceCertificate(E, float(obj["epsilon"]), gram, factors,
                                float(obj["residual"]))
        cert.class_residuals = {
            parse_word(spec, w): complex(re, im)
            for w, (re, im) in obj.get("class_residuals", {}).items()}
        return cert
    return SosCertificate(E, float(obj["epsilon"]), gram, factors,
                          float(obj["residual"]))
