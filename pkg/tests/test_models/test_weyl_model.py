import numpy as np
import pytest

from app.models.weyl_model import Ensemble, WeylExtendedChannel, WeylLabel, joint_weyl_basis, weyl_basis, weyl_matrix
from app.services.channel_service import ChannelService
from app.utils.exceptions import DimensionMismatchError, InvalidStateError, PreconditionError
from app.utils.linalg import random_density_matrix, random_unit_vector


def test_label_range_is_enforced():
    with pytest.raises(PreconditionError):
        WeylLabel(2, 0, 2)
    assert WeylLabel.from_index(5, 3) == WeylLabel(1, 2, 3)
    assert WeylLabel(1, 2, 3).index == 5


def test_identity_label():
    assert np.allclose(weyl_matrix(WeylLabel(0, 0, 4)), np.eye(4))


def test_qubit_label_one_one():
    assert np.allclose(weyl_matrix(WeylLabel(1, 1, 2)), [[0, -1], [1, 0]], atol=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_weyl_operators_are_unitary(k):
    for W in weyl_basis(k):
        assert np.allclose(W.conj().T @ W, np.eye(k), atol=1e-12)


# W_z W_z' equals W_{z+z'} up to a k-th root of unity
@pytest.mark.parametrize("k", [2, 3, 4])
def test_weyl_commutation(k):
    for z in range(k * k):
        for w in range(k * k):
            a, b = WeylLabel.from_index(z, k), WeylLabel.from_index(w, k)
            total = WeylLabel((a.x + b.x) % k, (a.y + b.y) % k, k)
            product = weyl_matrix(a) @ weyl_matrix(b)
            target = weyl_matrix(total)
            phase = np.trace(target.conj().T @ product) / k
            assert np.allclose(product, phase * target, atol=1e-12)
            assert abs(phase ** k - 1.0) < 1e-10


def test_joint_basis_is_kronecker_product():
    joint = joint_weyl_basis((2, 3))
    assert joint.shape == (36, 6, 6)
    assert np.allclose(joint[1 * 9 + 4], np.kron(weyl_basis(2)[1], weyl_basis(3)[4]))


def test_ensemble_validation():
    with pytest.raises(InvalidStateError):
        Ensemble((0.5, 0.4), (np.eye(2) / 2, np.eye(2) / 2))
    with pytest.raises(DimensionMismatchError):
        Ensemble((1.0,), (np.eye(2) / 2, np.eye(2) / 2))
    ens = Ensemble([0.25, 0.75], [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    assert np.allclose(ens.average(), np.diag([0.25, 0.75]))


def test_extension_needs_matching_moduli(channel_222):
    with pytest.raises(DimensionMismatchError):
        WeylExtendedChannel(channel_222, (3,))


def test_extension_dimensions(channel_222):
    ext = WeylExtendedChannel(channel_222, (2,))
    assert ext.input_dim == 8
    assert ext.output_dim == 2


# Pure-input fast path agrees with the density-matrix path
def test_extension_ket_path_matches_apply(channel_222, rng):
    ext = WeylExtendedChannel(channel_222, (2,))
    x = random_unit_vector(ext.input_dim, rng)
    assert np.allclose(ext.apply_to_ket(x), ext.apply(np.outer(x, x.conj())), atol=1e-12)


def test_extension_adjoint_duality(channel_222, rng):
    ext = WeylExtendedChannel(channel_222, (2,))
    rho = random_density_matrix(ext.input_dim, rng)
    G = random_density_matrix(2, rng)
    assert np.trace(G @ ext.apply(rho)) == pytest.approx(np.trace(ext.adjoint(G) @ rho), abs=1e-12)


def test_extension_preserves_trace(seeded):
    rng = seeded(4)
    ext = WeylExtendedChannel(ChannelService.random_subspace_channel(2, 2, 2, rng), (2,))
    for _ in range(100):
        assert np.trace(ext.apply(random_density_matrix(ext.input_dim, rng))).real == pytest.approx(1.0, abs=1e-10)


# e_z e_z* (x) rho0 maps to W_z Phi(rho0) W_z*
def test_label_state_output(channel_222, rng):
    ext = WeylExtendedChannel(channel_222, (2,))
    rho0 = random_density_matrix(2, rng)
    states = ext.label_states(rho0)
    for z, state in enumerate(states):
        W = ext.operators[z]
        assert np.allclose(ext.apply(state), W @ channel_222.apply(rho0) @ W.conj().T, atol=1e-12)
