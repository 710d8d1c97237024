"""Smoke test for the qmetric_py extension.

Build and run from the workspace root:

    cargo build -p qmetric-py --release --features extension-module
    cp target/release/libqmetric_py.so crates/py/python/qmetric_py.so
    python3 crates/py/python/smoke_test.py
"""

import math

import numpy as np

import qmetric_py as qm


def main():
    lee = qm.System.lee(1.0, 1.5, 1.0, 0.05, 8)
    assert lee.dim == 36 and lee.real_spectrum
    assert lee.similarity_residual() <= 1e-12

    h = np.array(lee.h)
    energies = np.sort_complex(np.linalg.eigvals(h))
    assert np.allclose(np.sort_complex(np.array(lee.eigenvalues)), energies, atol=1e-10)
    e_minus, e_plus = qm.lee_energies(1.0, 1.5, 1.0, 0.05, 3)
    assert abs(e_plus - e_minus - math.sqrt(0.25 - 4 * 0.05**2 * 4)) < 1e-12

    for name in ("q_spectral", "q_generator", "q_closed_form"):
        q = getattr(lee, name)()
        method = name[2:].replace("_", "-")
        report = lee.report(q, method)
        assert report["passed"], (name, report)
        assert qm.selfadjointness_residual(q, lee.h) <= 1e-10
        print(f"{name}: min eigenvalue on H' {report['min_q_eigenvalue_on_Hprime']:.4f}")

    q = np.array(lee.q_spectral())
    state = np.ones(36, dtype=complex) / 6.0
    series = lee.norm_series(q.tolist(), state.tolist(), [0.0, 2.5, 5.0, 10.0])
    q_norms = [s[0] for s in series]
    assert max(q_norms) - min(q_norms) <= 1e-10

    toy = qm.System([[1, 0.25j], [0.25j, 2]], [[1, 0], [0, -1]])
    assert np.allclose(np.array(toy.q_spectral()), np.array(toy.q_spectral()).conj().T)
    assert qm.fock_basis(1)[0] == (0, 0, 0)

    broken = qm.System.lee(1.0, 1.5, 1.0, 0.2, 8)
    assert not broken.real_spectrum
    try:
        broken.q_closed_form()
    except ValueError as e:
        print(f"closed form at g = 0.2 rejected: {e}")
    else:
        raise AssertionError("closed form accepted a broken regime")

    spectral = lee.spectral_data()
    assert len(spectral["eigenvalues"]) == 36
    print("smoke test passed")


if __name__ == "__main__":
    main()
