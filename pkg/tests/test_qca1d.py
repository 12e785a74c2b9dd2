import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import expm

from qcaqed.exceptions import DimensionTooLarge, ValidationError
from qcaqed.matrix_core import unitarity_error
from qcaqed.qca1d import (
    InteractionCoeffs,
    Lattice1DConfig,
    LatticeState1D,
    annihilator,
    boson_basis,
    build_evolution,
    coin_gate,
    fermion_basis,
    fermion_number,
    free_joint_evolution,
    full_step,
    interaction_hamiltonian,
    interaction_unitary,
    apply_interaction,
    make_basis,
    momentum_grid,
    negative_mode_population,
    plus_parity,
    reversal_conjugator,
    shift_gate,
    single_particle_block,
    time_reversal_defect,
    translation_commutator,
    translation_operator,
)
from qcaqed.reference import walk_1d_matrix


def fermions(n, theta=0.0, convention="table"):
    return Lattice1DConfig(n, "fermion", theta, convention=convention)


def bosons(n, trunc):
    return Lattice1DConfig(n, "boson", 0.0, boson_truncation=trunc)


# ----------------------------------------------------------------- config


@pytest.mark.parametrize("kwargs", [dict(n_sites=3), dict(n_sites=0), dict(n_sites=4, boson_truncation=-1),
                                    dict(n_sites=4, species="boson", theta=0.1), dict(n_sites=4, species="quark")])
def test_config_rejects(kwargs):
    with pytest.raises((ValidationError, ValueError)):
        Lattice1DConfig(**kwargs)


def test_basis_sizes():
    assert fermion_basis(8).dim == 256
    assert fermion_basis(8, 3).dim == 56
    # number-truncated bosons on 4 modes: C(4 + 2, 2) states with total <= 2
    assert boson_basis(4, 2).dim == 15
    assert boson_basis(4, 2, 2).dim == 10


def test_label_round_trip():
    fb = fermion_basis(4)
    for i in range(fb.dim):
        assert fb.parse_label(fb.label(i)) == i
    bb = boson_basis(4, 2)
    assert bb.label(bb.parse_label("0,2,0,0")) == "0,2,0,0"
    with pytest.raises(ValidationError):
        fb.parse_label("101")
    with pytest.raises(ValidationError):
        bb.parse_label("3,0,0,0")


def test_fermion_dimension_cap():
    with pytest.raises(DimensionTooLarge):
        make_basis(fermions(10))


# ------------------------------------------------------------------ gates


def test_gate_tables():
    c = coin_gate(0.3)
    assert unitarity_error(c) <= 1e-15
    assert np.allclose(c, c.T) and np.allclose(c @ c, np.eye(4))
    assert np.allclose(coin_gate(0) @ np.eye(4)[1], np.eye(4)[2])
    s = shift_gate()
    assert np.allclose(s @ s, np.eye(4))
    assert s[3, 3] == -1


@pytest.mark.parametrize("cfg", [fermions(4, 0.2), fermions(4, 0.2, "exponential"), bosons(4, 2)])
def test_evolution_unitary(cfg):
    u = build_evolution(cfg).toarray()
    assert unitarity_error(u) <= 1e-12


@pytest.mark.parametrize("cfg", [fermions(4, 0.2), fermions(4, 0.2, "exponential"), bosons(4, 2)])
def test_vacuum_fixed_point(cfg):
    basis = make_basis(cfg)
    vac = LatticeState1D.basis_state(basis, basis.label(0))
    assert np.allclose(vac.evolve(build_evolution(cfg)).amplitudes, vac.amplitudes)


def test_two_site_square_is_identity_at_theta_zero():
    u = build_evolution(fermions(2)).toarray()
    assert np.allclose(u @ u, np.eye(16))


@pytest.mark.parametrize("cfg", [fermions(6, 0.3), bosons(6, 2)])
def test_number_conservation(cfg):
    u = build_evolution(cfg)
    basis = make_basis(cfg)
    n = sp.diags(basis.occ.sum(axis=1).astype(complex))
    assert np.abs((u @ n - n @ u).toarray()).max() <= 1e-14


@pytest.mark.parametrize("theta", [0.0, 0.3, -1.1])
def test_single_particle_matches_walk(theta):
    assert np.allclose(single_particle_block(fermions(6, theta)), walk_1d_matrix(6, theta), atol=1e-14)


def test_single_particle_conventions_at_zero_mass():
    table = single_particle_block(fermions(4))
    exp = single_particle_block(fermions(4, convention="exponential"))
    bos = single_particle_block(bosons(4, 1))
    assert np.allclose(exp, bos)
    assert np.allclose(bos, -table)


def test_single_particle_phases_on_grid():
    # massless walk: eigenvalues exp(-+ i k) with k on the lattice grid
    lam = np.linalg.eigvals(single_particle_block(fermions(8)))
    steps = np.angle(lam) / (2 * np.pi / 8)
    assert np.allclose(steps, np.round(steps), atol=1e-12)


@pytest.mark.parametrize("convention", ["table", "exponential"])
def test_two_fermion_exchange_sign(convention):
    # (0,+) and (1,-) meet on one shift bond and pass each other: sign -1
    cfg = fermions(4, convention=convention)
    basis = make_basis(cfg, 2)
    out = LatticeState1D.basis_state(basis, "10010000").evolve(build_evolution(cfg, 2))
    assert out.records(1e-12) == [("01100000", -1.0, 0.0)]


def test_independent_movers_no_sign():
    cfg = fermions(4)
    basis = make_basis(cfg, 2)
    out = LatticeState1D.basis_state(basis, "10001000").evolve(build_evolution(cfg, 2))
    assert out.records(1e-12) == [("00100010", 1.0, 0.0)]


# ---------------------------------------------------------- time reversal


@pytest.mark.parametrize("cfg", [fermions(4, 0.25), fermions(4, 0.25, "exponential"), bosons(4, 2), bosons(6, 1)])
def test_time_reversal(cfg):
    assert time_reversal_defect(cfg) <= 1e-12


def test_time_reversal_needs_parity_for_exponential():
    cfg = fermions(4, 0.25, "exponential")
    u = build_evolution(cfg)
    from qcaqed.qca1d import coin_layer, sparse_norm

    c = coin_layer(cfg)
    assert sparse_norm(c @ u @ c.conj().T - u.conj().T) > 1e-3
    v = reversal_conjugator(cfg)
    assert sparse_norm(v - plus_parity(cfg)) == 0


def test_plus_parity_signs():
    cfg = fermions(2)
    basis = make_basis(cfg)
    v = plus_parity(cfg).diagonal()
    assert v[basis.parse_label("1000")] == -1
    assert v[basis.parse_label("0100")] == 1
    assert v[basis.parse_label("1010")] == 1


# ------------------------------------------------------------ translation


def test_translation_is_permutation():
    t = translation_operator(fermions(4)).toarray()
    assert np.allclose(t @ t.T, np.eye(t.shape[0]))
    t4 = np.linalg.matrix_power(t, 4)
    assert np.allclose(t4, np.eye(t.shape[0]))


@pytest.mark.parametrize("cfg", [fermions(6, 0.3), bosons(4, 2)])
def test_free_walk_translation_invariant(cfg):
    assert translation_commutator(build_evolution(cfg), cfg) <= 1e-12


def test_exponential_convention_breaks_plain_translation():
    cfg = fermions(4, 0.3, "exponential")
    assert translation_commutator(build_evolution(cfg), cfg) > 1


# ----------------------------------------------------------- interaction


@pytest.fixture(scope="module")
def small_pair():
    return fermions(4, 0.2), bosons(4, 1)


def test_zero_coupling_is_identity(small_pair):
    cf, cb = small_pair
    u = interaction_unitary(cf, cb, InteractionCoeffs.uniform(0.0), sector_f=1)
    assert np.allclose(u, np.eye(u.shape[0]))


def test_interaction_hermitian_and_number_conserving(small_pair, rng):
    cf, cb = small_pair
    alpha = 0.1 * (rng.normal(size=(3, 2, 2, 2)) + 1j * rng.normal(size=(3, 2, 2, 2)))
    coeffs = InteractionCoeffs(alpha)
    h = interaction_hamiltonian(cf, cb, coeffs)
    assert np.abs((h - h.conj().T).toarray()).max() == 0
    nf = fermion_number(cf, cb)
    assert np.abs((h @ nf - nf @ h).toarray()).max() <= 1e-14
    u = interaction_unitary(cf, cb, coeffs, sector_f=1)
    assert unitarity_error(u) <= 1e-12
    assert np.allclose(u, expm(-1j * interaction_hamiltonian(cf, cb, coeffs, 1).toarray()), atol=1e-12)


def test_apply_interaction_matches_dense(small_pair, rng):
    cf, cb = small_pair
    coeffs = InteractionCoeffs.uniform(0.07, 2)
    u = interaction_unitary(cf, cb, coeffs, sector_f=1)
    psi = rng.normal(size=u.shape[0]) + 0j
    psi /= np.linalg.norm(psi)
    assert np.allclose(apply_interaction(psi, cf, cb, coeffs, 1), u @ psi, atol=1e-12)


def test_interaction_coeff_validation():
    with pytest.raises(ValidationError):
        InteractionCoeffs(np.zeros((2, 2, 2, 2)))
    with pytest.raises(ValidationError):
        InteractionCoeffs(np.full((1, 2, 2, 2), np.nan))
    assert InteractionCoeffs(np.zeros((2, 2, 2))).range == 0


def test_interaction_rejects_mismatch():
    with pytest.raises(ValidationError):
        interaction_hamiltonian(fermions(4), bosons(6, 1), InteractionCoeffs.uniform(0.1))
    with pytest.raises(ValidationError):
        interaction_hamiltonian(bosons(4, 1), fermions(4), InteractionCoeffs.uniform(0.1))


def test_full_step_translation(small_pair):
    cf, cb = small_pair
    u = full_step(cf, cb, InteractionCoeffs.uniform(0.1, 2), sector_f=1)
    assert unitarity_error(u) <= 1e-11
    assert translation_commutator(u, cf, cb, sector_f=1) <= 1e-10
    scale = np.array([1.0, 1.3, 1.0, 1.0])
    broken = full_step(cf, cb, InteractionCoeffs(np.full((3, 2, 2, 2), 0.1), scale), sector_f=1)
    assert translation_commutator(broken, cf, cb, sector_f=1) > 1e-6


def test_free_fermion_step_translation():
    cf = fermions(4, 0.2)
    assert translation_commutator(build_evolution(cf), cf) <= 1e-10


def test_dense_cap(monkeypatch, small_pair):
    from qcaqed import qca1d

    monkeypatch.setattr(qca1d, "MAX_DENSE_DIM", 4)
    with pytest.raises(DimensionTooLarge):
        qca1d.interaction_unitary(*small_pair, InteractionCoeffs.uniform(0.1), sector_f=1)


# ---------------------------------------------------------------- states


def test_state_norm_checked():
    fb = fermion_basis(4)
    with pytest.raises(ValidationError):
        LatticeState1D(np.ones(fb.dim), fb)
    with pytest.raises(ValidationError):
        LatticeState1D(np.ones(3), fb)


def test_norm_preserved_over_steps(small_pair):
    cf, cb = small_pair
    fb, bb = make_basis(cf, 1), make_basis(cb)
    u = full_step(cf, cb, InteractionCoeffs.uniform(0.1), sector_f=1)
    state = LatticeState1D.basis_state(fb, "10000000", bb, "0,0,0,0,0,0,0,0")
    for _ in range(10):
        state = state.evolve(u)
    assert abs(np.linalg.norm(state.amplitudes) - 1) <= 1e-12


def test_records_round_trip(small_pair, rng):
    cf, cb = small_pair
    fb, bb = make_basis(cf, 1), make_basis(cb)
    psi = rng.normal(size=fb.dim * bb.dim) + 1j * rng.normal(size=fb.dim * bb.dim)
    state = LatticeState1D(psi / np.linalg.norm(psi), fb, bb)
    recs = state.records()
    assert "|" in recs[0][0]
    back = LatticeState1D.from_records(recs, fb, bb)
    assert np.array_equal(back.amplitudes, state.amplitudes)


# ------------------------------------------------------------ populations


def test_momentum_grid():
    assert np.allclose(momentum_grid(4), np.pi * np.array([-0.5, 0, 0.5, 1]))


def test_vacuum_has_no_population():
    cb = bosons(4, 2)
    bb = make_basis(cb)
    vac = LatticeState1D.basis_state(bb, ",".join("0" * 8))
    pops = negative_mode_population(vac, cb)
    assert pops.total == 0


def test_single_boson_population_parseval():
    cb = bosons(4, 1)
    bb = make_basis(cb)
    state = LatticeState1D.basis_state(bb, "0,0,1,0,0,0,0,0")
    pops = negative_mode_population(state, cb)
    assert pops.total == pytest.approx(1)
    assert np.allclose(pops.positive + pops.negative, 0.25)


def test_free_evolution_keeps_negative_modes_empty():
    # a positive-energy plane wave stays positive under the free step
    cb = bosons(4, 1)
    bb = make_basis(cb)
    k = np.pi / 2
    amps = np.zeros(bb.dim, dtype=complex)
    for x in range(4):
        occ = np.zeros(8, dtype=int)
        occ[2 * x] = 1
        amps[bb.index_of(occ)] = np.exp(-1j * k * x) / 2
    state = LatticeState1D(amps, bb)
    assert negative_mode_population(state, cb).negative.sum() <= 1e-14
    u = build_evolution(cb)
    for _ in range(5):
        state = state.evolve(u)
    assert negative_mode_population(state, cb).negative.sum() <= 1e-14


def test_annihilator_on_boson():
    bb = boson_basis(2, 2)
    a = annihilator(bb, 0).toarray()
    i2, i1 = bb.parse_label("2,0"), bb.parse_label("1,0")
    assert a[i1, i2] == pytest.approx(np.sqrt(2))


def test_free_joint_is_kron(small_pair):
    cf, cb = small_pair
    free = free_joint_evolution(cf, cb, 1)
    assert free.shape[0] == make_basis(cf, 1).dim * make_basis(cb).dim
