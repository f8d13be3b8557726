"""Smoke test for the noisecontent Python bindings.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""

import json
import math

import noisecontent as nc


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    # Qubit trivial observable: noise content 1.
    half = [[0.5, 0], [0, 0.5]]
    trivial = nc.Observable.quantum([half, half])
    assert trivial.is_valid()
    assert close(nc.noise_content(trivial).t, 1.0)

    # Sharp observables have no noise; reversing a qubit trine gives 1/2.
    sharp, other = nc.fourier_mub_pair(2)
    assert close(nc.noise_content(sharp).t, 0.0)
    trine = nc.reverse(nc.regular_rank1_povm(2, 3))
    d = nc.noise_content(trine)
    assert close(d.t, 0.5) and d.certification == "exact"
    assert d.reconstruct().max_effect_distance(trine) < 1e-9

    # Two reversed trines are certified compatible with an explicit joint.
    v = nc.sufficient_compatible([trine, trine])
    assert v.status == "CompatibleCertified"
    assert v.is_joint_of([trine, trine])
    assert v.marginal(0).max_effect_distance(trine) < 1e-9

    # Unbiased sharp pair: the inequality says nothing.
    assert nc.sufficient_compatible([sharp, other]).status == "Undecided"

    # Squit boundary at alpha + beta = 1, decided by the linear program.
    a, b = nc.squit_pair(0.3, 0.6)
    assert nc.lp_compatible([a, b]).status == "IncompatibleCertified"
    a, b = nc.squit_pair(0.4, 0.6)
    lp = nc.lp_compatible([a, b])
    assert lp.status == "CompatibleCertified" and lp.is_joint_of([a, b])

    # Doubly reversed sharp observables in dimension 3: (N-1)^2 = 4 are compatible.
    lam = nc.doubly_reverse_lambda(3)
    assert close(lam, 3 / 4)
    povms = [nc.doubly_reverse(nc.haar_sharp_povm(3, s)) for s in range(5)]
    assert nc.sufficient_compatible(povms[:4]).status == "CompatibleCertified"
    assert nc.sufficient_compatible(povms).status == "Undecided"

    # Exactly trivial process POVM is recognized.
    p = nc.orthogonal_trivial_ppovm([0.25, 0.75], 2, 2)
    assert p.kind == "process" and nc.noise_content(p).t == 1.0

    # JSON round trip, and the format the command line tool reads.
    back = nc.Observable.from_json(trine.to_json())
    assert back.max_effect_distance(trine) == 0.0
    assert json.loads(trine.to_json())["space"]["kind"] == "quantum"

    try:
        nc.Observable.quantum([[[1, 0], [0, 1]], [[1, 1j], [0, 1]]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-Hermitian effect accepted")

    report = json.loads(nc.Observable.quantum([half]).validate())
    assert report["violations"][0]["kind"] == "normalization"
    assert math.isfinite(nc.random_povm(3, 4, 7).effect_matrix(0)[0][0].real)

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
