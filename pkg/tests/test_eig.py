import math

import numpy as np
import pytest

from oracles import charpoly_angles, circular_multiset_distance, diag_unitary
from unitarg.core import IndexOutOfRange, ToleranceProfile, make_unitary, op_norm
from unitarg.eig import (
    EigenspaceQuery,
    Order,
    cluster_angles,
    eig_unitary,
    eigenspace,
    inverse_angle_map,
)
from unitarg.sampling import haar_matrix, haar_unitary


def test_identity_single_cluster():
    s = eig_unitary(make_unitary(np.eye(4)))
    np.testing.assert_allclose(s.angles, 0.0, atol=1e-15)
    assert s.clusters == ((0, 1, 2, 3),)


def test_diagonal_orderings():
    s = eig_unitary(make_unitary(diag_unitary(2.0, -1.0, 0.0)))
    np.testing.assert_allclose(s.desc, [2.0, 0.0, -1.0], atol=1e-14)
    np.testing.assert_allclose(s.asc, [-1.0, 0.0, 2.0], atol=1e-14)
    np.testing.assert_allclose(s.absdesc, [2.0, 1.0, 0.0], atol=1e-14)
    np.testing.assert_allclose(s.angles[s.perm_absdesc], [2.0, -1.0, 0.0], atol=1e-14)


def test_ties_broken_by_original_index():
    s = eig_unitary(make_unitary(diag_unitary(0.5, -0.5)))
    # |0.5| == |-0.5| up to rounding; stable order keeps index 0 first when exactly equal
    angles = np.array([0.5, -0.5])
    from unitarg.eig import _orderings
    _, _, absdesc = _orderings(angles)
    assert list(absdesc) == [0, 1]
    assert sorted(s.absdesc) == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("n", [2, 5])
def test_charpoly_oracle_agreement(n, rng):
    for _ in range(50):
        u = make_unitary(haar_matrix(n, rng))
        s = eig_unitary(u)
        assert s.recon_defect <= ToleranceProfile.for_dim(n).tol_recon
        assert circular_multiset_distance(s.angles, charpoly_angles(u.entries)) <= 1e-8


def test_reconstruction_over_many_haar_samples(rng):
    for n in range(2, 9):
        tol = ToleranceProfile.for_dim(n).tol_recon
        for _ in range(1000 // 7 + 1):
            u = make_unitary(haar_matrix(n, rng))
            s = eig_unitary(u)
            assert op_norm(u.entries - s.matrix()) <= tol
            w = s.vectors
            assert op_norm(w.conj().T @ w - np.eye(n)) <= 1e-10
            assert np.all(s.angles > -math.pi) and np.all(s.angles <= math.pi)
            assert np.all(np.diff(s.desc) <= 0) and np.all(np.diff(s.asc) >= 0)
            assert np.all(np.diff(s.absdesc) <= 0)


def test_conjugation_invariance(rng):
    for n in (2, 4, 7):
        for _ in range(30):
            u = haar_matrix(n, rng)
            q = haar_matrix(n, rng)
            a = eig_unitary(make_unitary(u)).angles
            b = eig_unitary(make_unitary(q @ u @ q.conj().T)).angles
            assert circular_multiset_distance(a, b) <= 1e-8


def test_degenerate_cluster_is_reorthonormalized(rng):
    q = haar_matrix(5, rng)
    u = make_unitary(q @ diag_unitary(1.0, 1.0, 1.0, -0.5, 0.2) @ q.conj().T)
    s = eig_unitary(u)
    sizes = sorted(len(c) for c in s.clusters)
    assert sizes == [1, 1, 3]
    top = eigenspace(s, EigenspaceQuery(Order.DESCENDING, 1, cluster=True))
    assert top.dim == 3
    assert top.orthonormality_defect() < 1e-10
    # the cluster basis spans the planted eigenspace
    planted = q[:, :3]
    assert np.linalg.svd(planted.conj().T @ top.basis, compute_uv=False).min() > 1 - 1e-10


def test_cluster_partition_properties(rng):
    tol = 1e-7
    for _ in range(200):
        base = rng.uniform(-math.pi, math.pi, size=6)
        angles = np.concatenate([base, base[:3] + rng.uniform(-1e-9, 1e-9, 3)])
        angles = np.clip(angles, -math.pi + 1e-12, math.pi)
        clusters = cluster_angles(angles, tol)
        flat = sorted(i for c in clusters for i in c)
        assert flat == list(range(len(angles)))
        for c in clusters:
            a = np.sort(angles[list(c)])
            assert np.all(np.diff(a) <= tol)


def test_clusters_join_across_branch_cut():
    angles = np.array([math.pi, -math.pi + 1e-9, 0.0])
    assert cluster_angles(angles, 1e-7) == ((0, 1), (2,))


def test_eigenspace_examples():
    s = eig_unitary(make_unitary(np.eye(3)))
    assert eigenspace(s, EigenspaceQuery(index=1, cluster=True)).dim == 3

    s = eig_unitary(make_unitary(diag_unitary(1.0, 1.0, 0.0)))
    assert eigenspace(s, EigenspaceQuery(index=1, cluster=True)).dim == 2
    assert eigenspace(s, EigenspaceQuery(index=1)).dim == 1

    s = eig_unitary(make_unitary(diag_unitary(1.0, 0.5, 0.0)))
    sub = eigenspace(s, EigenspaceQuery(Order.DESCENDING, 2))
    assert sub.dim == 1
    assert abs(abs(sub.basis[1, 0]) - 1.0) < 1e-12


def test_eigenspace_index_out_of_range():
    s = eig_unitary(make_unitary(np.eye(2)))
    with pytest.raises(IndexOutOfRange):
        eigenspace(s, EigenspaceQuery(index=3))
    with pytest.raises(IndexOutOfRange):
        eigenspace(s, EigenspaceQuery(index=0))


def test_inverse_angle_map_diagonal():
    s = eig_unitary(make_unitary(diag_unitary(0.4, -0.9)))
    inv = inverse_angle_map(s)
    np.testing.assert_allclose(inv.angles, [-0.4, 0.9], atol=1e-14)
    assert inv.asc[0] == pytest.approx(-s.desc[0])
    assert not inv.branch_edge


def test_inverse_angle_map_identity():
    s = eig_unitary(make_unitary(np.eye(3)))
    inv = inverse_angle_map(s)
    np.testing.assert_allclose(inv.angles, 0.0, atol=1e-15)


def test_inverse_angle_map_branch_edge_flag():
    s = eig_unitary(make_unitary(np.diag([-1.0 + 0j, 1.0])))
    assert s.angles.max() == math.pi
    inv = inverse_angle_map(s)
    assert inv.branch_edge
    # -pi maps back to +pi: the mirror identity is broken by design here
    assert inv.desc[0] == math.pi


def test_inverse_matches_direct_decomposition(rng):
    for n in (2, 3, 6):
        for _ in range(50):
            u = haar_unitary(n, rng)
            s = eig_unitary(u)
            inv = inverse_angle_map(s)
            direct = eig_unitary(u.adjoint())
            assert circular_multiset_distance(inv.angles, direct.angles) <= 1e-8
            if not inv.branch_edge:
                np.testing.assert_allclose(inv.asc, -s.desc, atol=1e-8)
