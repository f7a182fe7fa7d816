"""Generate the vendored FTEN fixtures and their manifest.

Run once from the repository root:

    python scripts/make_fixtures.py

Products (under fixtures/):
  - {system}_tau2_ab.ften        mixed-spin cluster-operator tensor (charge-charge)
  - {system}_tau2_ab_energy.ften energy companion W with
                                 (1/4) Σ W ∘ residual = doubles-energy error
  - h4_631g_t2.ften / h4_631g_v.ften   full-space aligned amplitude/integral pair
  - pi10_eri.ften                10-orbital π-system integrals (hermitian-chemist)
  - fixtures.json                recorded reference values
  - sha256 checksums printed for FIXTURES.md

The tau2 tensors populate both spin-assignment orderings of each amplitude
(symmetric supermatrix); the companion is calibrated and verified so the
package's doubles-energy functional reproduces the mixed-spin doubles
energy of the residual exactly.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
import chem_oracle

from sos_compress.ften import write_ften
from sos_compress.tensors import CHARGE_CHARGE, HERMITIAN_CHEMIST, PQRS_LADDER

FIXTURE_DIR = Path(__file__).parent.parent / "fixtures"


def mixed_spin_tensors(res):
    """(cluster tensor c, energy companion w, mixed-spin doubles energy)."""
    n = res["n_spin_orbitals"]
    nocc = res["n_occ"]
    spins = res["spins"]
    t2 = res["t2"]
    v = res["antisym"]
    c = np.zeros((n, n, n, n), dtype=complex)
    w = np.zeros((n, n, n, n), dtype=complex)
    e_mixed = 0.0
    for i in range(nocc):
        for j in range(nocc):
            if spins[i] == spins[j]:
                continue
            for a in range(nocc, n):
                for b in range(nocc, n):
                    e_mixed += 0.25 * v[i, j, a, b] * t2[i, j, a - nocc, b - nocc]
                    if spins[a] != spins[i] or spins[b] != spins[j]:
                        continue
                    amp = t2[i, j, a - nocc, b - nocc]
                    c[a, i, b, j] += amp
                    c[i, a, j, b] += -np.conj(amp)
                    w[a, i, b, j] += v[i, j, a, b]
                    w[i, a, j, b] += -v[i, j, a, b]
    # self-check: the linear functional reproduces the mixed-spin energy
    assert abs(0.25 * np.sum(w * c).real - e_mixed) < 1e-10
    return c, w, float(e_mixed)


def full_space_pair(res):
    """Index-aligned ⟨pq||rs⟩ and amplitude tensors over all spin-orbitals."""
    n = res["n_spin_orbitals"]
    nocc = res["n_occ"]
    t2_full = np.zeros((n, n, n, n), dtype=complex)
    t2_full[:nocc, :nocc, nocc:, nocc:] = res["t2"]
    return res["antisym"].astype(complex), t2_full


def pi_topology_eri():
    """10-orbital integrals with a genuine Coulomb kernel.

    Ten hydrogen atoms at the naphthalene carbon positions (bond length
    1.40 Å, STO-3G) give a 10-orbital basis whose two-electron tensor is
    transformed to the canonical RHF orbitals of the 10-electron cluster.
    A site-diagonal lattice model would be exactly one compression factor;
    this tensor has the full Coulomb structure of the paper's π-system
    benchmark at matching orbital count.
    """
    a = 1.40
    h = a * np.sqrt(3) / 2
    coords = np.array(
        [
            [-h, a], [-2 * h, a / 2], [-2 * h, -a / 2], [-h, -a],
            [0.0, -a / 2], [h, -a], [2 * h, -a / 2], [2 * h, a / 2],
            [h, a], [0.0, a / 2],
        ]
    )
    bonds = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 9), (9, 0),
             (4, 5), (5, 6), (6, 7), (7, 8), (8, 9)]
    for p, q in bonds:
        assert abs(np.linalg.norm(coords[p] - coords[q]) - a) < 1e-9
    atoms = [
        ("H", np.array([x * chem_oracle.ANGSTROM_TO_BOHR,
                        y * chem_oracle.ANGSTROM_TO_BOHR, 0.0]))
        for x, y in coords
    ]
    functions = chem_oracle.build_basis(atoms, "sto-3g")
    s, t, v, eri = chem_oracle.integrals(atoms, functions)
    e_elec, _, c = chem_oracle.rhf(s, t, v, eri, 10)
    mo = chem_oracle.mo_eri(eri, c, c, c, c)
    return mo, {
        "model": "H10 cluster at naphthalene carbon positions, STO-3G, "
                 "canonical RHF orbitals",
        "bond_length_angstrom": a,
        "rhf_total_energy": float(e_elec + chem_oracle.nuclear_repulsion(atoms)),
    }


def sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def main():
    FIXTURE_DIR.mkdir(exist_ok=True)
    manifest = {}
    written = []

    for system, label in (("h4", "h4_631g"), ("hf", "hf_sto3g"), ("o2", "o2_sto3g")):
        res = chem_oracle.run(system)
        c, w, e_mixed = mixed_spin_tensors(res)
        tau_path = FIXTURE_DIR / f"{label}_tau2_ab.ften"
        w_path = FIXTURE_DIR / f"{label}_tau2_ab_energy.ften"
        write_ften(tau_path, c, CHARGE_CHARGE)
        write_ften(w_path, w, CHARGE_CHARGE)
        written += [tau_path, w_path]
        manifest[label] = {
            "n_spin_orbitals": int(res["n_spin_orbitals"]),
            "n_occupied": int(res["n_occ"]),
            "scf_total_energy": float(res["scf_energy"]),
            "ccsd_correlation_energy": float(res["ccsd_correlation"]),
            "doubles_correlation_energy": float(res["doubles_energy"]),
            "mixed_spin_doubles_energy": e_mixed,
            "tau2_l2_norm": float(np.linalg.norm(c)),
        }
        print(f"{label}: SCF {res['scf_energy']:.10f}  "
              f"E_corr {res['ccsd_correlation']:.10f}  E_mixed {e_mixed:.10f}")
        if system == "h4":
            v_full, t2_full = full_space_pair(res)
            v_path = FIXTURE_DIR / "h4_631g_v.ften"
            t2_path = FIXTURE_DIR / "h4_631g_t2.ften"
            write_ften(v_path, v_full, PQRS_LADDER)
            write_ften(t2_path, t2_full, PQRS_LADDER)
            written += [v_path, t2_path]

    eri, meta = pi_topology_eri()
    eri_path = FIXTURE_DIR / "pi10_eri.ften"
    write_ften(eri_path, eri, HERMITIAN_CHEMIST)
    written.append(eri_path)
    manifest["pi10"] = meta

    manifest_path = FIXTURE_DIR / "fixtures.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    written.append(manifest_path)

    print("\nchecksums:")
    for path in written:
        print(f"  {sha256(path)}  {path.name}")


if __name__ == "__main__":
    main()
