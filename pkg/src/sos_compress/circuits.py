"""Compile factor lists into an abstract circuit IR.

A circuit is an ordered list of layers over ``n`` modes on a line. Layers
are stored in application order (first layer acts first):

- ``givens``: nearest-neighbor rotations plus a phase closure. A rotation
  ``(p, theta, phi)`` acts on modes ``(p, p+1)`` as the mode-space matrix
  ``[[cosθ, −e^{iφ} sinθ], [e^{−iφ} sinθ, cosθ]]`` (the exponential of an
  antihermitian one-body generator). The layer realizes
  ``M(rot_K) ··· M(rot_1) · diag(e^{i·phases})`` and rounds pack
  non-overlapping rotations (Clements rectangle, depth ≤ n).
- ``charge``: ``exp(i Σ_{p<q} angle[p,q] n_p n_q + i Σ_p phases[p] n_p)``,
  with every pair scheduled in one of ``n`` odd-even transposition rounds.
- ``phase``: ``exp(i Σ_p phases[p] n_p)``.

The compiled sequence for factors ``l = 1..L`` is
``givens(μ₁†), charge(J₁), givens(μ₂†μ₁), charge(J₂), …, givens(μ_L)``:
adjacent basis changes are merged classically and a trailing rotation
closes the chain, so L factors cost L charge layers and L+1 givens layers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from sos_compress.errors import DecompositionError
from sos_compress.tensors import SOSFactor


@dataclass(frozen=True)
class GivensRotation:
    p: int  # acts on modes (p, p+1)
    theta: float
    phi: float
    round: int = 0


@dataclass(frozen=True)
class GivensLayer:
    rotations: tuple[GivensRotation, ...]
    phases: np.ndarray

    @property
    def depth(self) -> int:
        return 1 + max((r.round for r in self.rotations), default=-1)


@dataclass(frozen=True)
class ChargeCoupling:
    p: int
    q: int
    angle: float
    round: int
    wire: int  # left position of the adjacent pair executing this coupling


@dataclass(frozen=True)
class ChargeLayer:
    couplings: tuple[ChargeCoupling, ...]
    phases: np.ndarray
    n_rounds: int

    @property
    def depth(self) -> int:
        return self.n_rounds


@dataclass(frozen=True)
class PhaseLayer:
    phases: np.ndarray

    @property
    def depth(self) -> int:
        return 1


@dataclass(frozen=True)
class CircuitIR:
    n_modes: int
    layers: tuple

    @property
    def gate_count(self) -> int:
        count = 0
        for layer in self.layers:
            if isinstance(layer, GivensLayer):
                count += len(layer.rotations)
            elif isinstance(layer, ChargeLayer):
                count += len(layer.couplings)
        return count

    @property
    def depth(self) -> int:
        return sum(layer.depth for layer in self.layers)


def rotation_matrix(n: int, p: int, theta: float, phi: float) -> np.ndarray:
    mat = np.eye(n, dtype=complex)
    c, s = math.cos(theta), math.sin(theta)
    mat[p, p] = c
    mat[p, p + 1] = -np.exp(1j * phi) * s
    mat[p + 1, p] = np.exp(-1j * phi) * s
    mat[p + 1, p + 1] = c
    return mat


def rotation_generator(n: int, p: int, theta: float, phi: float) -> np.ndarray:
    """Antihermitian one-body generator whose exponential is the rotation."""
    gen = np.zeros((n, n), dtype=complex)
    gen[p, p + 1] = -theta * np.exp(1j * phi)
    gen[p + 1, p] = theta * np.exp(-1j * phi)
    return gen


def layer_unitary(layer, n: int) -> np.ndarray:
    """Mode-space matrix of a givens or phase layer."""
    if isinstance(layer, PhaseLayer):
        return np.diag(np.exp(1j * layer.phases))
    mat = np.diag(np.exp(1j * np.asarray(layer.phases, dtype=float)))
    for rot in layer.rotations:
        mat = rotation_matrix(n, rot.p, rot.theta, rot.phi) @ mat
    return mat


def _assign_rounds(rotations: list[tuple[int, float, float]]) -> tuple[GivensRotation, ...]:
    """Greedy ASAP packing into rounds of non-overlapping adjacent pairs."""
    last_round = {}
    out = []
    for p, theta, phi in rotations:
        rnd = max(last_round.get(p, -1), last_round.get(p + 1, -1)) + 1
        last_round[p] = rnd
        last_round[p + 1] = rnd
        out.append(GivensRotation(p, theta, phi, rnd))
    return tuple(out)


def givens_decompose(u: np.ndarray, tol: float = 1e-10) -> GivensLayer:
    """Decompose a unitary into ≤ n(n−1)/2 nearest-neighbor rotations + phases.

    Entries of the lower triangle are nulled along alternating
    antidiagonals, odd ones by column mixing from the right and even ones
    by row mixing from the left (the rectangular nulling order); the
    resulting rounds have depth ≤ n. The returned layer reproduces ``u``
    as ``rotations (in order) ∘ phases``.
    """
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if np.linalg.norm(u.conj().T @ u - np.eye(n)) > tol * n:
        raise ValueError("input matrix is not unitary within tolerance")
    work = u.copy()
    left_ops: list[tuple[int, float, float]] = []
    right_ops: list[tuple[int, float, float]] = []

    for i in range(1, n):
        if i % 2:
            for j in range(i):
                row, col = n - 1 - j, i - 1 - j
                if abs(work[row, col]) == 0.0:
                    right_ops.append((col, 0.0, 0.0))
                    continue
                theta = math.atan2(abs(work[row, col]), abs(work[row, col + 1]))
                phi = float(np.angle(work[row, col + 1]) - np.angle(-work[row, col]))
                right_ops.append((col, theta, phi))
                work = work @ rotation_matrix(n, col, theta, phi)
        else:
            for j in range(1, i + 1):
                row, col = n + j - i - 1, j - 1
                if abs(work[row, col]) == 0.0:
                    left_ops.append((row - 1, 0.0, 0.0))
                    continue
                theta = math.atan2(abs(work[row, col]), abs(work[row - 1, col]))
                phi = float(np.angle(work[row - 1, col]) - np.angle(-work[row, col]))
                left_ops.append((row - 1, theta, phi))
                work = rotation_matrix(n, row - 1, theta, phi) @ work

    diag_angles = np.angle(np.diagonal(work))
    # commute the diagonal rightward through the daggered right ops: the
    # diagonal is preserved, each rotation only picks up a phase shift
    rotations: list[tuple[int, float, float]] = []
    for p, theta, phi in right_ops:
        rotations.append((p, -theta, phi + diag_angles[p] - diag_angles[p + 1]))
    for p, theta, phi in reversed(left_ops):
        rotations.append((p, -theta, phi))
    rotations = [r for r in rotations if abs(r[1]) > 1e-14]
    # matrix product order is [reversed(left†), reversed(right'†)] · D;
    # application order is the reverse of that product
    layer = GivensLayer(_assign_rounds(rotations), np.asarray(diag_angles))
    return layer


def _odd_even_schedule(n: int) -> dict[tuple[int, int], tuple[int, int]]:
    """Round and wire at which each mode pair meets in the swap network."""
    order = list(range(n))
    meet: dict[tuple[int, int], tuple[int, int]] = {}
    for rnd in range(n):
        start = rnd % 2
        for wire in range(start, n - 1, 2):
            a, b = order[wire], order[wire + 1]
            meet[(min(a, b), max(a, b))] = (rnd, wire)
            order[wire], order[wire + 1] = b, a
    return meet


def charge_layer_from_coupling(j: np.ndarray, tol: float = 1e-8) -> ChargeLayer:
    """Charge-charge layer of ``exp(Σ J[p,q] ñ_p ñ_q)``.

    The generator must be diagonal-unitary, i.e. J purely imaginary (up to
    ``tol`` relative); angles are ``Im(J[p,q] + J[q,p])`` for p < q, with
    diagonal entries folded into the accompanying phase vector.
    """
    j = np.asarray(j, dtype=complex)
    n = j.shape[0]
    scale = max(np.max(np.abs(j)), 1e-300)
    if np.max(np.abs(j.real)) > tol * scale:
        raise ValueError(
            "coupling matrix has a real part; the charge layer would not be "
            "unitary (antihermitian generators give purely imaginary J)"
        )
    meet = _odd_even_schedule(n)
    couplings = []
    for p in range(n):
        for q in range(p + 1, n):
            rnd, wire = meet[(p, q)]
            couplings.append(
                ChargeCoupling(p, q, float((j[p, q] + j[q, p]).imag), rnd, wire)
            )
    return ChargeLayer(tuple(couplings), np.diagonal(j).imag.copy(), n)


def _merge_simultaneous(factors: list[SOSFactor]) -> list[SOSFactor]:
    """Fuse factors sharing a simultaneous group into one layer-compatible
    factor; their rotations must commute (disjoint spin sectors)."""
    merged: list[SOSFactor] = []
    by_group: dict[int, SOSFactor] = {}
    order: list[int] = []
    for factor in factors:
        group = factor.simultaneous_group
        if group is None:
            merged.append(factor)
            continue
        if group not in by_group:
            by_group[group] = factor
            order.append(group)
            continue
        prev = by_group[group]
        commute_defect = np.linalg.norm(prev.mu @ factor.mu - factor.mu @ prev.mu)
        if commute_defect > 1e-10 * prev.n:
            raise ValueError(
                f"factors in simultaneous group {group} do not commute "
                f"(defect {commute_defect:.3e})"
            )
        by_group[group] = SOSFactor(
            prev.mu @ factor.mu,
            prev.j + factor.j,
            prev.tag,
            sector="merged",
            simultaneous_group=group,
        )
    ordered = [by_group[g] for g in order]
    # keep the original relative ordering: grouped factors first appear at
    # their group's first occurrence
    out: list[SOSFactor] = []
    gi = mi = 0
    for factor in factors:
        if factor.simultaneous_group is None:
            out.append(merged[mi])
            mi += 1
        elif gi < len(ordered) and ordered[gi].simultaneous_group == factor.simultaneous_group:
            out.append(ordered[gi])
            gi += 1
    return out


def layer_to_dict(layer) -> dict:
    if isinstance(layer, GivensLayer):
        return {
            "type": "givens",
            "rotations": [
                {"p": r.p, "q": r.p + 1, "theta": r.theta, "phi": r.phi, "round": r.round}
                for r in layer.rotations
            ],
            "phases": [float(x) for x in layer.phases],
        }
    if isinstance(layer, ChargeLayer):
        return {
            "type": "charge",
            "couplings": [
                {"p": c.p, "q": c.q, "angle": c.angle, "round": c.round, "wire": c.wire}
                for c in layer.couplings
            ],
            "phases": [float(x) for x in layer.phases],
            "schedule": "odd-even",
            "rounds": layer.n_rounds,
        }
    if isinstance(layer, PhaseLayer):
        return {"type": "phase", "phases": [float(x) for x in layer.phases]}
    raise TypeError(f"unknown layer type {type(layer)!r}")


def layer_from_dict(doc: dict):
    kind = doc["type"]
    if kind == "givens":
        return GivensLayer(
            tuple(
                GivensRotation(r["p"], r["theta"], r["phi"], r.get("round", 0))
                for r in doc["rotations"]
            ),
            np.asarray(doc["phases"], dtype=float),
        )
    if kind == "charge":
        return ChargeLayer(
            tuple(
                ChargeCoupling(c["p"], c["q"], c["angle"], c.get("round", 0), c.get("wire", 0))
                for c in doc["couplings"]
            ),
            np.asarray(doc["phases"], dtype=float),
            int(doc.get("rounds", len(doc["phases"]))),
        )
    if kind == "phase":
        return PhaseLayer(np.asarray(doc["phases"], dtype=float))
    raise ValueError(f"unknown layer type {kind!r}")


def circuit_to_json(ir: CircuitIR) -> dict:
    return {
        "version": 1,
        "n_modes": ir.n_modes,
        "layers": [layer_to_dict(layer) for layer in ir.layers],
        "metadata": {"gate_count": ir.gate_count, "depth": ir.depth},
    }


def circuit_from_json(doc: dict) -> CircuitIR:
    if doc.get("version") != 1:
        raise ValueError(f"unsupported circuit version {doc.get('version')!r}")
    return CircuitIR(
        int(doc["n_modes"]),
        tuple(layer_from_dict(layer) for layer in doc["layers"]),
    )


def realize_layer(layer, n: int) -> np.ndarray:
    """Dense Fock-space unitary of one layer.

    Givens layers are realized rotation by rotation as exponentials of
    one-body generators; charge and phase layers as diagonal exponentials
    over occupations.
    """
    from sos_compress import fock

    if isinstance(layer, GivensLayer):
        mat = fock.exp_operator(
            fock.build_one_body(1j * np.diag(np.asarray(layer.phases, dtype=float)))
        ).mat
        for rot in layer.rotations:
            gen = rotation_generator(n, rot.p, rot.theta, rot.phi)
            mat = fock.exp_operator(fock.build_one_body(gen)).mat @ mat
        return mat
    occupations = (
        np.arange(2**n)[:, None] >> np.arange(n)[None, :]
    ) & 1
    if isinstance(layer, ChargeLayer):
        exponent = occupations @ np.asarray(layer.phases, dtype=float)
        for coupling in layer.couplings:
            exponent = exponent + coupling.angle * (
                occupations[:, coupling.p] * occupations[:, coupling.q]
            )
        return np.diag(np.exp(1j * exponent))
    if isinstance(layer, PhaseLayer):
        exponent = occupations @ np.asarray(layer.phases, dtype=float)
        return np.diag(np.exp(1j * exponent))
    raise TypeError(f"unknown layer type {type(layer)!r}")


def realize_circuit(ir: CircuitIR) -> np.ndarray:
    """Dense Fock-space unitary of the whole circuit (layers applied in order)."""
    dim = 2**ir.n_modes
    total = np.eye(dim, dtype=complex)
    for layer in ir.layers:
        total = realize_layer(layer, ir.n_modes) @ total
    return total


def merge_and_schedule(factors: list[SOSFactor], merge: bool = True) -> CircuitIR:
    """Compile an ordered factor list into the layered circuit IR.

    With ``merge`` (default), consecutive basis changes are concatenated
    classically: the emitted rotation layers carry ``μ₁†``, then
    ``μ_l† μ_{l−1}`` between charge layers, and a trailing ``μ_L`` closure,
    2L+1 layers in total. Factors tagged with the same simultaneous group
    are fused into a single pair of layers first. Without ``merge``, each
    factor emits its own enter/exit rotation layers (the represented total
    unitary is identical).
    """
    if not factors:
        return CircuitIR(0 if not factors else factors[0].n, ())
    work = _merge_simultaneous(factors)
    n = work[0].n
    if any(f.n != n for f in work):
        raise ValueError("factors have inconsistent mode counts")
    layers: list = []
    if merge:
        previous = np.eye(n, dtype=complex)
        for factor in work:
            layers.append(givens_decompose(factor.mu.conj().T @ previous))
            layers.append(charge_layer_from_coupling(factor.j))
            previous = factor.mu
        layers.append(givens_decompose(previous))
    else:
        for factor in work:
            layers.append(givens_decompose(factor.mu.conj().T))
            layers.append(charge_layer_from_coupling(factor.j))
            layers.append(givens_decompose(factor.mu))
    return CircuitIR(n, tuple(layers))
