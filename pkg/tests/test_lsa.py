import numpy as np
import pytest
from scipy import sparse

from litclust.errors import ConfigError, DimsTooLarge
from litclust.lsa import (
    EmbeddingMatrix,
    TruncatedLsa,
    dump_embedding,
    reduce,
    truncated_svd,
)
from litclust.vectorize import WeightedMatrix


def as_weighted(dense):
    dense = np.asarray(dense, dtype=float)
    return WeightedMatrix(
        terms=tuple(f"t{i:03d}" for i in range(dense.shape[0])),
        docs=tuple(f"d{j:03d}" for j in range(dense.shape[1])),
        weights=sparse.csr_array(dense),
        provenance={},
    )


def random_sparse(m, n, density=0.3, seed=0):
    rng = np.random.default_rng(seed)
    dense = rng.random((m, n)) * (rng.random((m, n)) < density)
    return dense


def test_rank_one_matrix_recovered_exactly():
    u = np.array([1.0, 2.0, 3.0])
    v = np.array([4.0, 0.5, 2.0, 1.0])
    a = np.outer(u, v)
    uu, s, vt = truncated_svd(a, 1)
    reconstruction = uu @ np.diag(s) @ vt
    assert np.max(np.abs(reconstruction - a)) <= 1e-9


def test_diagonal_singular_values_sorted():
    emb = reduce(as_weighted(np.diag([3.0, 4.0])), 2)
    assert emb.singular_values.tolist() == pytest.approx([4.0, 3.0], abs=1e-12)


def test_small_sparse_matches_gram_eigensolve():
    dense = random_sparse(50, 40, seed=1)
    _, s, _ = truncated_svd(sparse.csr_array(dense), 10, seed=0)
    # Independent route: dense symmetric eigensolve of the Gram matrix.
    gram = dense.T @ dense
    eigvals = np.linalg.eigvalsh(gram)[::-1]
    expected = np.sqrt(np.maximum(eigvals[:10], 0))
    assert np.max(np.abs(s - expected) / expected) <= 1e-6


def test_randomized_path_matches_dense_svd():
    # Big enough to bypass the dense fallback (min(shape) > 64).
    dense = random_sparse(150, 120, density=0.2, seed=2)
    u, s, vt = truncated_svd(sparse.csr_array(dense), 12, seed=3)
    reference = np.linalg.svd(dense, compute_uv=False)[:12]
    assert np.max(np.abs(s - reference) / reference) <= 1e-6
    # Rank-12 truncation error should match the optimal one closely.
    approx = u @ np.diag(s) @ vt
    u_ref, s_ref, vt_ref = np.linalg.svd(dense, full_matrices=False)
    best = u_ref[:, :12] @ np.diag(s_ref[:12]) @ vt_ref[:12]
    assert np.linalg.norm(approx - dense) <= np.linalg.norm(best - dense) * (1 + 1e-6)


def test_frobenius_error_non_increasing_in_dims():
    dense = random_sparse(90, 70, seed=4)
    a = sparse.csr_array(dense)
    errors = []
    for n_dims in range(1, 21):
        u, s, vt = truncated_svd(a, n_dims, seed=0)
        errors.append(np.linalg.norm(dense - u @ np.diag(s) @ vt))
    diffs = np.diff(errors)
    assert np.all(diffs <= 1e-9)


def test_squared_singular_values_are_gram_eigenvalues():
    dense = random_sparse(30, 25, seed=5)
    _, s, _ = truncated_svd(dense, 8)
    eig = np.linalg.eigvalsh(dense.T @ dense)[::-1][:8]
    assert np.max(np.abs(s**2 - eig)) <= 1e-6 * max(1.0, eig[0])


def test_embedding_rows_are_scaled_document_factors():
    dense = random_sparse(40, 20, seed=6)
    emb = reduce(as_weighted(dense), 5)
    _, s, vt = truncated_svd(dense, 5)
    assert np.allclose(emb.vectors, vt.T * s, atol=1e-12)
    assert emb.dims == 5
    assert emb.vectors.shape == (20, 5)


def separated_spectrum_matrix(m, n, seed):
    """Random matrix with a well-separated singular spectrum.

    Singular vectors of (near-)tied singular values are not unique, so
    order-invariance is only well-posed when the spectrum is separated.
    """
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, min(m, n))))
    v, _ = np.linalg.qr(rng.standard_normal((n, min(m, n))))
    s = 10.0 * 0.8 ** np.arange(min(m, n))
    return (u * s) @ v.T


def test_document_order_invariance_up_to_permutation():
    dense = separated_spectrum_matrix(80, 66, seed=7)
    perm = np.random.default_rng(8).permutation(66)
    emb_a = reduce(as_weighted(dense), 6, seed=1)
    emb_b = reduce(as_weighted(dense[:, perm]), 6, seed=1)
    assert np.allclose(emb_b.vectors, emb_a.vectors[perm], atol=1e-8)


def test_seed_determinism_bit_stable():
    dense = random_sparse(100, 80, density=0.25, seed=9)
    emb1 = reduce(as_weighted(dense), 7, seed=42)
    emb2 = reduce(as_weighted(dense), 7, seed=42)
    assert (emb1.vectors == emb2.vectors).all()
    assert (emb1.singular_values == emb2.singular_values).all()


def test_dims_too_large():
    with pytest.raises(DimsTooLarge):
        reduce(as_weighted(np.ones((3, 5))), 4)


def test_iteration_cap_raises_convergence_failure(monkeypatch):
    import litclust.lsa as lsa_mod
    from litclust.errors import ConvergenceFailure

    monkeypatch.setattr(lsa_mod, "MAX_POWER_ITERS", 1)
    dense = random_sparse(100, 80, seed=12)
    with pytest.raises(ConvergenceFailure):
        lsa_mod._randomized_svd(sparse.csr_array(dense), 5, seed=0)


def test_sign_convention_fixed():
    dense = random_sparse(70, 68, seed=10)
    for seed in (0, 1, 2):
        _, _, vt = truncated_svd(sparse.csr_array(dense), 5, seed=seed)
        for i in range(vt.shape[0]):
            assert vt[i, np.argmax(np.abs(vt[i]))] > 0


class TestEstimator:
    def test_fit_transform(self):
        w = as_weighted(random_sparse(30, 20, seed=11))
        est = TruncatedLsa(n_dims=4, seed=0)
        emb = est.fit_transform(w)
        assert isinstance(emb, EmbeddingMatrix)
        assert est.singular_values_.shape == (4,)

    def test_params(self):
        est = TruncatedLsa(n_dims=9, seed=5)
        assert est.get_params() == {"n_dims": 9, "seed": 5}
        est.set_params(n_dims=3)
        assert est.n_dims == 3

    def test_transform_requires_fit(self):
        with pytest.raises(ConfigError):
            TruncatedLsa().transform()


def test_dump_embedding_format(tmp_path):
    emb = EmbeddingMatrix(
        docs=("a", "b"),
        dims=2,
        vectors=np.array([[1.23456789012, -2.0], [0.000012345, 3.5]]),
        singular_values=np.array([2.0, 1.0]),
    )
    path = tmp_path / "emb.tsv"
    dump_embedding(emb, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "a\t1.23456789\t-2"
    assert lines[1] == "b\t1.2345e-05\t3.5"
