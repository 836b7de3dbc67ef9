"""Mutual information, projective measurements and quantum discord.

Direction names follow the measured party: ``"b2a"`` is D(B->A), the loss of
correlation when B is measured; ``"a2b"`` measures A. Internally the measured
party is always moved to the second slot, so every routine below works on a
state laid out as (unmeasured, measured).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from mpmath import mp
from scipy.linalg import expm
from scipy.optimize import minimize

from . import qmat
from .states import DensityMatrix, entropy_of, nats_to_bits, shannon_entropy

Direction = Literal["a2b", "b2a"]

DEGENERACY_RTOL = 1e-9
ORTHO_TOL = 1e-10
TIE_TOL = 1e-12
HP_THRESHOLD = 1e-6  # nats; smaller gaps are recomputed at high precision
HP_MAX_DIM = 16


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Rank-one projective measurement on one party; columns of ``basis``."""

    subsystem: Literal["A", "B"]
    basis: np.ndarray

    def __post_init__(self):
        if self.subsystem not in ("A", "B"):
            raise MeasurementError(f"subsystem must be 'A' or 'B', got {self.subsystem!r}")
        b = qmat.as_matrix(self.basis)
        gram = b.conj().T @ b
        if np.max(np.abs(gram - np.eye(b.shape[0]))) > ORTHO_TOL:
            raise MeasurementError("measurement basis is not orthonormal/complete")
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def projectors(self) -> list[np.ndarray]:
        return [np.outer(e, e.conj()) for e in self.basis.T]


@dataclass
class DiscordReport:
    mutual_info: float
    measured_mutual_info: float
    discord: float
    basis: ProjectiveMeasurement
    kind: Literal["diagonal", "optimized"]
    direction: Direction
    converged: bool = True

    @property
    def discord_bits(self) -> float:
        return nats_to_bits(self.discord)

    def to_dict(self) -> dict:
        return {
            "mutual_info_nats": float(self.mutual_info),
            "measured_mutual_info_nats": float(self.measured_mutual_info),
            "discord_nats": float(self.discord),
            "discord_bits": float(self.discord_bits),
            "basis": [[[float(z.real), float(z.imag)] for z in e] for e in self.basis.basis.T],
            "kind": self.kind,
            "direction": self.direction,
            "converged": bool(self.converged),
        }


@dataclass(frozen=True)
class OptimizerOptions:
    """Settings of the multi-start measurement-basis search.

    Qubit blocks use a ``grid x grid`` Bloch-angle grid; larger blocks use
    ``n_samples`` seeded points of the unitary chart. The ``n_refine`` best
    starting points are polished with Nelder-Mead.
    """

    grid: int = 24
    n_refine: int = 5
    n_samples: int = 256
    tol: float = 1e-9
    xatol: float = 1e-9
    maxiter: int = 20000
    seed: int = 0


def _check_bipartite(rho: DensityMatrix):
    if not rho.is_bipartite:
        raise ValueError("state is not bipartite (both dims must exceed 1)")


def _measured_last(rho: DensityMatrix, direction: Direction) -> DensityMatrix:
    if direction == "b2a":
        return rho
    if direction == "a2b":
        return rho.swapped()
    raise ValueError(f"direction must be 'a2b' or 'b2a', got {direction!r}")


def _subsystem(direction: Direction) -> str:
    return "B" if direction == "b2a" else "A"


def mutual_information(rho: DensityMatrix) -> float:
    """S(A) + S(B) - S(AB) in nats."""
    _check_bipartite(rho)
    return (
        entropy_of(qmat.partial_trace(rho.mat, rho.dims, "A"))
        + entropy_of(qmat.partial_trace(rho.mat, rho.dims, "B"))
        - entropy_of(rho.mat)
    )


def measure(rho: DensityMatrix, m: ProjectiveMeasurement) -> tuple[DensityMatrix, np.ndarray]:
    """Non-selective measurement of one party: dephased state and outcome probabilities."""
    _check_bipartite(rho)
    da, db = rho.dims
    d_meas = db if m.subsystem == "B" else da
    if m.dim != d_meas:
        raise MeasurementError(
            f"basis dimension {m.dim} does not match subsystem {m.subsystem} ({d_meas})"
        )
    out = np.zeros_like(rho.mat)
    probs = []
    for p in m.projectors():
        big = np.kron(np.eye(da), p) if m.subsystem == "B" else np.kron(p, np.eye(db))
        term = big @ rho.mat @ big
        probs.append(np.trace(term).real)
        out += term
    return DensityMatrix(out, rho.dims), np.array(probs)


# -- conditional-entropy objective -------------------------------------------


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _conditional_entropy(r: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """Sum over outcome vectors of ``H(sigma_b) - H(p_b)``.

    ``r`` is the state reshaped to ``(da, db, da, db)`` with the measured
    party last; ``vecs`` has shape ``(n, db, k)`` holding ``k`` outcome
    vectors for each of ``n`` candidates. Summed over a full basis this is
    ``S(A B~) - S(B~)``.
    """
    da, db = r.shape[0], r.shape[1]
    n, _, k = vecs.shape
    eye = np.eye(da)
    # rows (a, j), cols (c, b): I_A (x) vecs, one block matrix per candidate
    big = (eye[None, :, None, :, None] * vecs[:, None, :, None, :]).reshape(n, da * db, da * k)
    s = big.conj().transpose(0, 2, 1) @ r.reshape(da * db, da * db) @ big
    sig = np.diagonal(s.reshape(n, da, k, da, k), axis1=2, axis2=4).transpose(0, 3, 1, 2)
    lam = np.clip(np.linalg.eigvalsh(sig), 0.0, None)
    p = np.clip(np.trace(sig, axis1=2, axis2=3).real, 0.0, None)
    return -_xlogx(lam).sum(axis=(1, 2)) + _xlogx(p).sum(axis=1)


def _bloch_pair(theta, phi) -> np.ndarray:
    """Orthonormal qubit bases for arrays of Bloch angles, shape ``(n, 2, 2)``."""
    theta = np.atleast_1d(theta)
    phi = np.atleast_1d(phi)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    ph = np.exp(1j * phi)
    out = np.empty((theta.size, 2, 2), dtype=complex)
    out[:, 0, 0] = c
    out[:, 1, 0] = ph * s
    out[:, 0, 1] = -np.conj(ph) * s
    out[:, 1, 1] = c
    return out


def _chart_unitary(x: np.ndarray, m: int) -> np.ndarray:
    """``exp(iK)`` for a Hermitian ``K`` built from ``m*m`` real parameters."""
    k = np.zeros((m, m), dtype=complex)
    k[np.diag_indices(m)] = x[:m]
    iu = np.triu_indices(m, 1)
    n_off = len(iu[0])
    k[iu] = x[m : m + n_off] + 1j * x[m + n_off : m + 2 * n_off]
    k = k + np.triu(k, 1).conj().T
    return expm(1j * k)


def _pick(values: np.ndarray, params: np.ndarray) -> int:
    """Index of the minimum; near-ties go to the lexicographically smallest params."""
    best = values.min()
    tied = np.flatnonzero(values <= best + TIE_TOL)
    order = sorted(tied, key=lambda i: tuple(np.round(params[i], 12)))
    return int(order[0])


def _optimize_block(
    r: np.ndarray, frame: np.ndarray, opts: OptimizerOptions
) -> tuple[np.ndarray, float, bool]:
    """Minimize the conditional entropy over bases of the span of ``frame``.

    ``frame`` is ``(db, m)`` with orthonormal columns; the returned vectors
    are ``frame @ W`` for the best unitary ``W`` found. Zero chart
    parameters reproduce ``frame`` itself.
    """
    m = frame.shape[1]
    if m == 2:

        def to_vecs(params):
            params = np.atleast_2d(params)
            w = _bloch_pair(params[:, 0], params[:, 1])
            return np.einsum("jm,nmk->njk", frame, w)

        th = np.linspace(0.0, np.pi, opts.grid)
        ph = np.linspace(0.0, 2 * np.pi, opts.grid, endpoint=False)
        tt, pp = np.meshgrid(th, ph, indexing="ij")
        starts = np.column_stack([tt.ravel(), pp.ravel()])
    else:

        def to_vecs(params):
            params = np.atleast_2d(params)
            return np.stack([frame @ _chart_unitary(x, m) for x in params])

        rng = np.random.default_rng(opts.seed)
        starts = np.vstack(
            [np.zeros(m * m), rng.uniform(-np.pi, np.pi, size=(opts.n_samples, m * m))]
        )

    values = _conditional_entropy(r, to_vecs(starts))
    order = np.lexsort((np.arange(len(values)), values))[: opts.n_refine]

    def f(x):
        return float(_conditional_entropy(r, to_vecs(x))[0])

    cand_params, cand_vals, cand_ok = [], [], []
    for i in order:
        res = minimize(
            f,
            starts[i],
            method="Nelder-Mead",
            options={"xatol": opts.xatol, "fatol": opts.tol, "maxiter": opts.maxiter},
        )
        # never let refinement end above its own start
        if res.fun <= values[i]:
            cand_params.append(res.x)
            cand_vals.append(res.fun)
        else:
            cand_params.append(starts[i])
            cand_vals.append(values[i])
        cand_ok.append(bool(res.success))
    cand_params.append(starts[0])
    cand_vals.append(values[0])
    cand_ok.append(True)
    params = np.array(cand_params)
    vals = np.array(cand_vals)
    k = _pick(vals, params)
    return to_vecs(params[k])[0], float(vals[k]), cand_ok[k]


def _clusters(lam: np.ndarray) -> list[list[int]]:
    scale = max(float(np.max(np.abs(lam))), np.finfo(float).tiny)
    groups = [[0]]
    for i in range(1, len(lam)):
        if lam[i] - lam[i - 1] < DEGENERACY_RTOL * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _schmidt_vectors(rho_ml: DensityMatrix, opts: OptimizerOptions) -> tuple[np.ndarray, bool]:
    """Eigenbasis of the measured party, degenerate blocks resolved by entropy."""
    red = qmat.partial_trace(rho_ml.mat, rho_ml.dims, "B")
    lam, v = qmat.eigh(red)
    r = rho_ml.mat.reshape(*rho_ml.dims, *rho_ml.dims)
    vecs = v.copy()
    converged = True
    for idx in _clusters(lam):
        if len(idx) > 1:
            block, _, ok = _optimize_block(r, v[:, idx], opts)
            vecs[:, idx] = block
            converged &= ok
    return vecs, converged


def schmidt_basis(
    rho: DensityMatrix,
    subsystem: Literal["A", "B"],
    opts: OptimizerOptions | None = None,
) -> ProjectiveMeasurement:
    """Measurement in the eigenbasis of the reduced state of ``subsystem``.

    Within degenerate eigenspaces the basis minimizing the post-measurement
    entropy of the joint state is chosen.
    """
    _check_bipartite(rho)
    direction: Direction = "b2a" if subsystem == "B" else "a2b"
    vecs, _ = _schmidt_vectors(_measured_last(rho, direction), opts or OptimizerOptions())
    return ProjectiveMeasurement(subsystem, _orthonormalize(vecs))


def _orthonormalize(vecs: np.ndarray) -> np.ndarray:
    q, rr = np.linalg.qr(vecs)
    return q * (np.diag(rr) / np.abs(np.diag(rr)))


def _measured_entropy_hp(rho_ml: DensityMatrix, vecs: np.ndarray, dps: int = 50):
    """``S(A B~) - S(AB)`` at high precision, returned as an mpmath number."""
    from .states import entropy_hp

    da, db = rho_ml.dims
    with mp.workdps(dps):
        rho = mp.matrix(rho_ml.mat.tolist())
        e = mp.matrix(vecs.tolist())
        # Gram-Schmidt at working precision so the projectors are exact
        cols = []
        for j in range(db):
            c = e[:, j]
            for q in cols:
                c = c - q * (q.transpose_conj() * c)[0]
            cols.append(c / mp.norm(c))
        s_meas = mp.mpf(0)
        for q in cols:
            sig = mp.matrix(da, da)
            for a in range(da):
                for c in range(da):
                    acc = mp.mpc(0)
                    for j in range(db):
                        for k in range(db):
                            acc += mp.conj(q[j]) * rho[a * db + j, c * db + k] * q[k]
                    sig[a, c] = acc
            s_meas += entropy_hp(sig, dps)
        return s_meas - entropy_hp(rho, dps)


def _mutual_parts(rho_ml: DensityMatrix) -> tuple[float, float, float]:
    s_a = entropy_of(qmat.partial_trace(rho_ml.mat, rho_ml.dims, "A"))
    s_b = entropy_of(qmat.partial_trace(rho_ml.mat, rho_ml.dims, "B"))
    return s_a, s_b, entropy_of(rho_ml.mat)


def diagonal_discord(
    rho: DensityMatrix,
    direction: Direction = "b2a",
    opts: OptimizerOptions | None = None,
    precise: bool | None = None,
) -> DiscordReport:
    """Discord with the measured party measured in its Schmidt basis.

    Because that basis diagonalizes the measured party's reduced state, the
    value equals ``S(A B~) - S(AB)``. ``precise=None`` re-evaluates gaps
    below ``HP_THRESHOLD`` at 50 digits; ``True``/``False`` force either path.
    """
    _check_bipartite(rho)
    opts = opts or OptimizerOptions()
    rho_ml = _measured_last(rho, direction)
    vecs, converged = _schmidt_vectors(rho_ml, opts)
    vecs = _orthonormalize(vecs)
    r = rho_ml.mat.reshape(*rho_ml.dims, *rho_ml.dims)
    s_a, s_b, s_ab = _mutual_parts(rho_ml)
    cond = float(_conditional_entropy(r, vecs[None])[0])
    probs = np.einsum("jb,jk,kb->b", vecs.conj(), qmat.partial_trace(rho_ml.mat, rho_ml.dims, "B"), vecs).real
    gap = cond + shannon_entropy(np.clip(probs, 0, None)) - s_ab
    use_hp = (abs(gap) < HP_THRESHOLD) if precise is None else precise
    if use_hp and rho_ml.dim <= HP_MAX_DIM:
        gap = float(_measured_entropy_hp(rho_ml, vecs))
    mi = s_a + s_b - s_ab
    return DiscordReport(
        mutual_info=mi,
        measured_mutual_info=mi - gap,
        discord=gap,
        basis=ProjectiveMeasurement(_subsystem(direction), vecs),
        kind="diagonal",
        direction=direction,
        converged=converged,
    )


def discord(
    rho: DensityMatrix,
    direction: Direction = "b2a",
    opts: OptimizerOptions | None = None,
) -> DiscordReport:
    """Discord minimized over rank-one projective measurements of one party.

    The Schmidt basis is always among the candidates, so the result never
    exceeds the diagonal discord.
    """
    _check_bipartite(rho)
    opts = opts or OptimizerOptions()
    rho_ml = _measured_last(rho, direction)
    d_meas = rho_ml.dims[1]
    if d_meas > 4:
        raise ValueError(f"measured subsystem dimension {d_meas} exceeds optimizer limit 4")
    diag = diagonal_discord(rho, direction, opts)
    frame = _orthonormalize(diag.basis.basis)
    r = rho_ml.mat.reshape(*rho_ml.dims, *rho_ml.dims)
    vecs, cond, converged = _optimize_block(r, frame, opts)
    vecs = _orthonormalize(vecs)
    s_a, s_b, s_ab = _mutual_parts(rho_ml)
    value = s_b - s_ab + cond
    if value >= diag.discord:
        value, vecs = diag.discord, diag.basis.basis
    mi = s_a + s_b - s_ab
    return DiscordReport(
        mutual_info=mi,
        measured_mutual_info=mi - value,
        discord=value,
        basis=ProjectiveMeasurement(_subsystem(direction), vecs),
        kind="optimized",
        direction=direction,
        converged=converged and diag.converged,
    )
