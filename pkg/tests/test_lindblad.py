import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrlind.errors import DimensionOverflow, NegativeRate
from kerrlind.fock import A, NUM, OperatorExpr, adjoint, annihilation, coherent_state, realize
from kerrlind.lindblad import (
    CHANNEL_COUNTS,
    ORDERS,
    DissipatorTerm,
    assemble_liouvillian,
    build_hamiltonian,
    build_model,
    channel_report,
    channel_report_csv,
    dissipators_order1,
    dissipators_order2,
    engineered_cooling,
    liouvillian_from_matrices,
    order2_loss_jumps,
    parity_sectors,
    unvec,
    vec,
)
from kerrlind.model import TWO_PI, BathLabel, with_alpha_sq

from .conftest import G3, OMEGA_D


def brute_force_generator(h, jumps):
    """Apply the master equation to every matrix unit E_ij and stack the results."""
    n = h.shape[0]
    cols = []
    for j, i in itertools.product(range(n), range(n)):  # column-major order of vec
        e = np.zeros((n, n), dtype=complex)
        e[i, j] = 1.0
        out = -1j * (h @ e - e @ h)
        for rate, c in jumps:
            cd = c.conj().T
            out += rate * (c @ e @ cd - 0.5 * (cd @ c @ e + e @ cd @ c))
        cols.append(out.reshape(-1, order="F"))
    return np.array(cols).T


def random_matrix(rng, n, hermitian=False):
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (m + m.conj().T) / 2 if hermitian else m


@pytest.mark.parametrize("seed", range(4))
def test_kron_assembly_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = 4
    h = random_matrix(rng, n, hermitian=True)
    jumps = [(abs(rng.normal()), random_matrix(rng, n)) for _ in range(3)]
    L = liouvillian_from_matrices(h, jumps)
    np.testing.assert_allclose(L.matrix, brute_force_generator(h, jumps), atol=1e-12)


def test_vec_round_trip():
    rho = np.arange(9.0).reshape(3, 3)
    assert vec(rho)[1] == rho[1, 0]
    np.testing.assert_array_equal(unvec(vec(rho), 3), rho)


def test_two_level_pure_loss_spectrum():
    kappa = 3.0
    a = annihilation(2)
    L = liouvillian_from_matrices(np.zeros((2, 2)), [(kappa, a)])
    eigs = np.sort(np.linalg.eigvals(L.matrix).real)
    np.testing.assert_allclose(eigs, [-kappa, -kappa / 2, -kappa / 2, 0.0], atol=1e-12)


def test_pure_loss_spectrum_enumerated():
    # eigenvalues of kappa D[a] are -kappa (m + n) / 2 for the coherences |m><n|
    kappa, n = 2.0, 6
    L = liouvillian_from_matrices(np.zeros((n, n)), [(kappa, annihilation(n))])
    got = np.sort(np.linalg.eigvals(L.matrix).real)
    want = np.sort([-kappa * (m + k) / 2 for m in range(n) for k in range(n)])
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_hamiltonian_only_spectrum():
    delta, n = 1.7, 5
    L = liouvillian_from_matrices(delta * realize(NUM, n), [])
    got = np.sort_complex(np.round(np.linalg.eigvals(L.matrix), 10))
    want = np.sort_complex(np.round([1j * delta * (m - k) for m in range(n) for k in range(n)], 10))
    np.testing.assert_allclose(got, want, atol=1e-9)


def test_hamiltonian_sign():
    # d rho_01 / dt = -i (E_0 - E_1) rho_01 = +i delta rho_01
    delta = 2.0
    L = liouvillian_from_matrices(delta * realize(NUM, 2), [])
    rho = np.array([[0, 1], [0, 0]], dtype=complex)
    np.testing.assert_allclose(L.apply(rho), 1j * delta * rho)


def test_generator_preserves_trace_and_hermiticity(reference):
    p = with_alpha_sq(reference.params, 4.0)
    L = assemble_liouvillian(build_model(p, reference.bath, "2"), 14)
    # trace functional is a left null vector
    trace = vec(np.eye(14))
    assert np.abs(trace @ L.matrix).max() < 1e-9 * L.norm
    rng = np.random.default_rng(1)
    rho = random_matrix(rng, 14, hermitian=True)
    out = L.apply(rho)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-9 * L.norm)


def test_parity_blocks_are_decoupled(reference):
    p = with_alpha_sq(reference.params, 3.0)
    m = build_model(p, reference.bath, "2")
    assert m.parity_symmetric
    L = assemble_liouvillian(m, 12)
    even, odd = parity_sectors(12)
    assert len(even) + len(odd) == 144
    assert np.abs(L.matrix[np.ix_(even, odd)]).max() == 0
    assert np.abs(L.matrix[np.ix_(odd, even)]).max() == 0


def test_reference_hamiltonian_terms(params):
    p = with_alpha_sq(params, 10.0)
    h = build_hamiltonian(p)
    assert h.coefficient(2, 2).real == pytest.approx(-TWO_PI * 320e3, rel=1e-3)
    assert h.coefficient(2, 0) == h.coefficient(0, 2) == p.epsilon2
    assert h.is_hermitian()


@pytest.mark.parametrize("order", ORDERS)
def test_channel_counts(reference, order):
    m = build_model(with_alpha_sq(reference.params, 4.0), reference.bath, order)
    assert len(m.dissipators) == CHANNEL_COUNTS[order]


def test_dc_pair_added_when_supplied(reference):
    with pytest.warns(UserWarning):
        bath = reference.bath.replace(dc_loss=1e3, dc_heat=1e2)
    terms = dissipators_order2(with_alpha_sq(reference.params, 4.0), bath, prune=False)
    assert len(terms) == CHANNEL_COUNTS["2"] + 2
    assert terms[0].bath is BathLabel.DC


def test_zero_temperature_prunes_gain(params, loss_only):
    p = with_alpha_sq(params, 4.0)
    active = dissipators_order1(p, loss_only)
    assert [d.label for d in active] == ["1:half:loss"]
    assert active[0].rate == pytest.approx(5e4)


def test_order1_jump_coefficients(reference):
    p = with_alpha_sq(reference.params, 10.0)
    terms = {d.label: d for d in dissipators_order1(p, reference.bath)}
    half = terms["1:half:loss"].jump
    assert half.coefficient(0, 1) == 1
    assert half.coefficient(1, 0) == pytest.approx(2 * p.epsilon2 / OMEGA_D)
    assert terms["1:half:gain"].jump == adjoint(half)
    two = terms["1:one:loss"]
    loss, _ = reference.bath.rates(BathLabel.ONE, OMEGA_D)
    assert two.rate == pytest.approx(loss / 75**2)
    three = terms["1:three_half:loss"]
    assert three.jump == A
    assert three.rate == pytest.approx(5e4 * (3 * p.epsilon2 / OMEGA_D) ** 2, rel=1e-6)


def test_order2_gain_jumps_are_adjoints(reference):
    p = with_alpha_sq(reference.params, 6.0)
    terms = dissipators_order2(p, reference.bath, prune=False)
    for loss, gain in zip(terms[::2], terms[1::2]):
        assert (loss.direction, gain.direction) == ("loss", "gain")
        assert gain.jump == adjoint(loss.jump)


def test_order2_reduces_without_drive(params):
    jumps = order2_loss_jumps(params)
    # without squeezing the omega_d jump is the bare two-photon term
    assert jumps[BathLabel.ONE] == OperatorExpr.monomial(0, 2, 8 * G3 / (3 * OMEGA_D))
    assert jumps[BathLabel.DC] == OperatorExpr()
    assert jumps[BathLabel.THREE_HALF].coefficient(0, 1) == 0


def test_order2_parities(reference):
    jumps = order2_loss_jumps(with_alpha_sq(reference.params, 6.0))
    assert jumps[BathLabel.HALF].parity() == 1
    assert jumps[BathLabel.THREE_HALF].parity() == 1
    for lbl in (BathLabel.ONE, BathLabel.TWO, BathLabel.FIVE_HALF):
        assert jumps[lbl].parity() == 0


def test_negative_rate_rejected():
    with pytest.raises(NegativeRate):
        DissipatorTerm(-1.0, A, BathLabel.HALF, "loss", "0")


def test_dimension_budget(reference):
    m = build_model(with_alpha_sq(reference.params, 4.0), reference.bath, "0")
    with pytest.raises(DimensionOverflow):
        assemble_liouvillian(m, 81)


def test_displaced_cooling_annihilates_coherent_states(params):
    p = with_alpha_sq(params, 4.0).replace(kappa_2ph=1e4)
    term = engineered_cooling(p)
    assert term.label == "engineered:2ph"
    dim = 40
    L = liouvillian_from_matrices(np.zeros((dim, dim)), [(term.rate, realize(term.jump, dim))])
    for alpha in (2.0, -2.0):
        psi = coherent_state(alpha, dim)
        assert np.abs(L.apply(np.outer(psi, psi.conj()))).max() < 1e-6 * term.rate
    assert engineered_cooling(p, "bare").jump == OperatorExpr.monomial(0, 2)
    assert engineered_cooling(params) is None


def test_channel_report_order_and_csv(reference):
    p = with_alpha_sq(reference.params, 10.0)
    rows = channel_report(build_model(p, reference.bath, "1"), 10.0)
    rates = [r.effective_rate_at_alpha for r in rows]
    assert rates == sorted(rates, reverse=True)
    assert rows[0].label == "1:half:loss"
    # <alpha| (a + c ad)^dag (a + c ad) |alpha> = |alpha + c alpha*|^2 + |c|^2
    c = 2 * p.epsilon2 / OMEGA_D
    want = rows[0].rate_per_s * ((1 + c) ** 2 * 10.0 + c**2)
    assert rows[0].effective_rate_at_alpha == pytest.approx(want, rel=1e-12)
    text = channel_report_csv(rows)
    assert text.splitlines()[0] == "order,bath_label,direction,rate_per_s,jump_expr_text,effective_rate_at_alpha"
    assert len(text.splitlines()) == len(rows) + 1


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 8.0), st.sampled_from(ORDERS), st.integers(6, 12))
def test_generator_is_trace_preserving_everywhere(alpha_sq, order, dim):
    from kerrlind.sweep import reference_config

    cfg = reference_config()
    L = assemble_liouvillian(build_model(with_alpha_sq(cfg.params, alpha_sq), cfg.bath, order), dim)
    trace = vec(np.eye(dim))
    assert np.abs(trace @ L.matrix).max() <= 1e-10 * L.norm
