import math

import numpy as np
import pytest
from scipy import linalg

from heatchain.errors import BudgetExhausted, NonPhysical, SingularSum
from heatchain.measures import (
    CriterionSpec,
    TwoModeState,
    block_form,
    entropy_function,
    gaussian_discord_left,
    gaussian_discord_right,
    log_negativity,
    minimal_conditional_determinant,
    optimize_criterion,
    pair_measures,
    partial_transpose,
    probe_covariance,
    reduce_two_mode,
    shipped_criterion,
    simon_witness,
    symplectic_eigenvalues,
    tau_kappa_n,
    von_neumann_entropy,
)
from oracles import discord_bruteforce, local_symplectic, product_state, tmsv, two_mode_squeezed_thermal


# --- symplectic spectra and entropies -------------------------------------------


def test_entropy_function_values():
    assert entropy_function(1.0) == 0.0
    assert entropy_function(3.0) == pytest.approx(2 * math.log(2), rel=1e-15)
    nbar = 0.7
    assert entropy_function(2 * nbar + 1) == pytest.approx((nbar + 1) * math.log(nbar + 1) - nbar * math.log(nbar))


def test_thermal_state_spectrum():
    nbar = 1.3
    sigma = np.diag([2 * nbar + 1] * 2 + [1.0] * 2)
    np.testing.assert_allclose(symplectic_eigenvalues(sigma), [1.0, 2 * nbar + 1])
    assert von_neumann_entropy(sigma) == pytest.approx(entropy_function(2 * nbar + 1))


def test_direct_sum_spectrum(rng):
    a = product_state(rng)[:2, :2]
    b = two_mode_squeezed_thermal(0.4, 1.5, 2.5)
    s = linalg.block_diag(a, b)
    expect = np.sort(np.concatenate([symplectic_eigenvalues(a), symplectic_eigenvalues(b)]))
    np.testing.assert_allclose(symplectic_eigenvalues(s), expect, rtol=1e-12)


def test_block_ordering_spectrum():
    sigma = two_mode_squeezed_thermal(0.3, 1.2, 2.0)
    perm = [0, 2, 1, 3]
    np.testing.assert_allclose(
        symplectic_eigenvalues(sigma[np.ix_(perm, perm)], ordering="block"), [1.2, 2.0], rtol=1e-12
    )


def test_not_positive_definite():
    with pytest.raises(NonPhysical):
        symplectic_eigenvalues(np.diag([1.0, -1.0, 1.0, 1.0]))


def test_uncertainty_violation_rejected():
    with pytest.raises(NonPhysical):
        log_negativity(TwoModeState(0.5 * np.eye(4)))


# --- entanglement -----------------------------------------------------------------


@pytest.mark.parametrize("s", [0.0, 0.1, 0.5, 1.2])
def test_tmsv_log_negativity(s):
    assert log_negativity(TwoModeState(tmsv(s))) == pytest.approx(2 * s, abs=1e-12)


def test_vacuum_measures_vanish():
    m = pair_measures(0.5 * np.eye(6), "L", "R")
    assert m["simon"] == 0.0 and m["D_right"] == 0.0 and m["D_left"] == 0.0
    assert m["E_N"] == pytest.approx(0.0, abs=1e-14)


def test_partial_transpose_flips_one_momentum():
    st = TwoModeState(tmsv(0.3))
    pt = partial_transpose(st)
    assert pt[0, 3] == -st.sigma[0, 3] and pt[3, 3] == st.sigma[3, 3] and pt[1, 3] == -st.sigma[1, 3]


def test_simon_witness():
    value, flag = simon_witness(TwoModeState(tmsv(0.4)))
    assert flag and value == pytest.approx(-(math.sinh(0.8) ** 2) / 4)
    value, flag = simon_witness(TwoModeState(np.eye(4)))
    assert not flag and value == 0.0


def test_local_symplectic_invariance(rng):
    sigma = two_mode_squeezed_thermal(0.6, 1.3, 1.9)
    for _ in range(5):
        S = linalg.block_diag(local_symplectic(rng), local_symplectic(rng))
        a, b = TwoModeState(sigma), TwoModeState(S @ sigma @ S.T)
        assert log_negativity(b) == pytest.approx(log_negativity(a), abs=1e-10)
        assert gaussian_discord_right(b) == pytest.approx(gaussian_discord_right(a), abs=1e-9)
        assert gaussian_discord_left(b) == pytest.approx(gaussian_discord_left(a), abs=1e-9)


# --- discord ---------------------------------------------------------------------


def test_discord_matches_bruteforce(rng):
    for _ in range(20):
        s = rng.uniform(0.05, 1.0)
        nu_a, nu_b = rng.uniform(1.0, 3.0, size=2)
        sigma = two_mode_squeezed_thermal(s, nu_a, nu_b)
        S = linalg.block_diag(local_symplectic(rng), local_symplectic(rng))
        sigma = S @ sigma @ S.T
        assert gaussian_discord_right(TwoModeState(sigma)) == pytest.approx(discord_bruteforce(sigma), abs=1e-6)


def test_product_states_have_no_discord(rng):
    for _ in range(10):
        st = TwoModeState(product_state(rng))
        assert gaussian_discord_right(st) < 1e-12
        assert gaussian_discord_left(st) < 1e-12
        assert log_negativity(st) == 0.0


def test_pure_state_discord_is_entanglement_entropy():
    s = 0.7
    st = TwoModeState(tmsv(s))
    expect = entropy_function(math.cosh(2 * s))
    assert gaussian_discord_right(st) == pytest.approx(expect, rel=1e-9)
    assert gaussian_discord_left(st) == pytest.approx(expect, rel=1e-9)


def test_left_discord_is_right_discord_of_swap():
    sigma = two_mode_squeezed_thermal(0.5, 1.1, 2.7)
    st = TwoModeState(sigma)
    assert gaussian_discord_left(st) == gaussian_discord_right(st.swapped())
    assert gaussian_discord_left(st) != pytest.approx(gaussian_discord_right(st), rel=1e-3)


def test_conditional_determinant_pure_second_mode():
    assert minimal_conditional_determinant(2.0, 1.0, 0.0, 2.0) == 2.0


def test_reduce_two_mode_scaling():
    V = np.diag([0.5, 0.7, 0.9, 0.5, 0.6, 0.8])
    st = reduce_two_mode(V, "L", "R")
    np.testing.assert_allclose(np.diag(st.sigma), [1.0, 1.0, 1.8, 1.6])
    st2 = reduce_two_mode(V, 0, 2, hbar=2.0)
    np.testing.assert_allclose(st2.sigma, 0.5 * st.sigma)
    with pytest.raises(ValueError):
        reduce_two_mode(V, "C", "C")


# --- multipartite criterion -------------------------------------------------------


def test_shipped_criteria_load():
    for kappa in (2, 3):
        spec = shipped_criterion(kappa, 3)
        assert spec.kappa == kappa and spec.n == 3 and len(spec.P) == len(spec.a)
        np.testing.assert_array_equal(spec.Jn, block_form(3))
        again = CriterionSpec.from_document(spec.to_document())
        assert again.a == spec.a
        for p, q in zip(spec.P, again.P):
            np.testing.assert_array_equal(p, q)


def test_criterion_validation():
    with pytest.raises(ValueError):
        CriterionSpec(3, 3, (1.0,), (np.eye(6), np.eye(6)), block_form(3))
    with pytest.raises(ValueError):
        CriterionSpec(3, 3, (1.0,), (np.eye(4),), block_form(3))
    with pytest.raises(ValueError):
        CriterionSpec(3, 3, (1.0,), (np.zeros((6, 6)),), block_form(3))


def test_criterion_at_zero_displacement(rng):
    spec = shipped_criterion(3)
    A = rng.normal(size=(6, 6))
    V = 0.5 * np.eye(6) + 0.05 * A @ A.T
    Sigma = probe_covariance(rng.normal(size=12), 3)
    expect = (1 - sum(spec.a)) / math.sqrt(np.linalg.det(Sigma + V))
    assert tau_kappa_n(V, np.zeros(6), Sigma, spec) == pytest.approx(expect, rel=1e-12)


def test_singular_sum():
    with pytest.raises(SingularSum):
        tau_kappa_n(np.zeros((6, 6)), np.zeros(6), np.zeros((6, 6)), shipped_criterion(3))


def test_probe_is_pure(rng):
    np.testing.assert_allclose(probe_covariance(np.zeros(12), 3), 0.5 * np.eye(6), atol=1e-15)
    for _ in range(5):
        Sigma = probe_covariance(rng.normal(size=12), 3)
        np.testing.assert_allclose(symplectic_eigenvalues(2 * Sigma, ordering="block"), 1.0, rtol=1e-9)


def _pure_three_mode(rng):
    S = linalg.block_diag(local_symplectic(rng), local_symplectic(rng), local_symplectic(rng))
    perm = [0, 2, 4, 1, 3, 5]  # interleaved -> block ordering
    S = S[np.ix_(perm, perm)]
    return 0.5 * S @ S.T


def test_identity_maps_never_positive_on_vacuum(rng):
    # with P_j = 1 both Gaussians coincide on the vacuum for every pure probe
    spec = CriterionSpec(3, 3, (1.0,), (np.eye(6),), block_form(3))
    V = 0.5 * np.eye(6)
    for _ in range(10):
        X = rng.normal(size=6)
        Sigma = probe_covariance(rng.normal(size=12), 3)
        assert tau_kappa_n(V, X, Sigma, spec) == pytest.approx(0.0, abs=1e-12)
    assert optimize_criterion(V, spec, restarts=3, maxfev=1000).value <= 1e-12


def test_hot_product_state_criterion_not_positive(rng):
    spec = shipped_criterion(3)
    for _ in range(3):
        V = _pure_three_mode(rng) * rng.uniform(1.5, 3.0)
        assert optimize_criterion(V, spec, restarts=3, maxfev=1500, seed=1).value <= 1e-9


def test_optimizer_reproducible_and_monotone():
    spec = shipped_criterion(3)
    V = 0.5 * np.eye(6)
    V[0, 1] = V[1, 0] = 0.2
    a = optimize_criterion(V, spec, restarts=2, maxfev=800, seed=7)
    b = optimize_criterion(V, spec, restarts=2, maxfev=800, seed=7)
    c = optimize_criterion(V, spec, restarts=4, maxfev=800, seed=7)
    assert a.value == b.value
    assert c.diagnostics["restart_values"][:2] == a.diagnostics["restart_values"]
    assert c.value >= a.value


def test_optimizer_budget_strict():
    with pytest.raises(BudgetExhausted) as info:
        optimize_criterion(0.5 * np.eye(6), shipped_criterion(3), restarts=1, maxfev=20, strict=True)
    assert info.value.result.diagnostics["exhausted"]
