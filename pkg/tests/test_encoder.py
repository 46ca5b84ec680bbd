import numpy as np
import pytest

from hrt import (DimensionError, EncoderParams, EmRoutingParams,
                 InvertedRoutingParams, SeededRng, SemanticSpace, Tensor,
                 encode)

from oracles import encoder_oracle


def build_setup(seed, r_patches=4, d_feat=8, n_attr=3, n_classes=4,
                tau=5, n_primary=3, d_cap=4, k_em=2, k_td=2):
    rng = SeededRng(seed)
    semantics = SemanticSpace(attr_vectors=rng.normal((n_attr, tau)),
                              compact_vectors=rng.normal((n_attr, d_cap)),
                              class_attr=rng.uniform((n_classes, n_attr)))
    params = EncoderParams(
        proj=Tensor(rng.normal((d_feat, n_primary * d_cap), scale=0.3)),
        act_proj=Tensor(rng.normal((d_feat, n_primary), scale=0.3)),
        em=EmRoutingParams(transforms=Tensor(rng.normal((n_primary, d_cap, d_cap))),
                           beta=Tensor(0.1), gamma=Tensor(0.05), lam=1.0,
                           iterations=k_em, pose_mode="vector"),
        inverted=InvertedRoutingParams(
            vote_transforms=Tensor(rng.normal((n_attr, d_cap, d_cap))),
            iterations=k_td))
    features = rng.normal((r_patches, d_feat))
    return features, semantics, params


class TestEncode:
    def test_single_patch(self):
        features, semantics, params = build_setup(1, r_patches=1)
        out = encode(Tensor(features), semantics, params)
        assert np.allclose(out.attention.data, 1.0, atol=1e-12)
        for a in range(semantics.num_attributes):
            assert np.allclose(out.h.data[:, a], features[0], atol=1e-9)

    def test_saturated_softmax_selects_one_patch(self):
        # a spiked agreement column must turn into a one-hot attention column
        # and pick out exactly that patch's feature
        from hrt import tensor as T
        rng = SeededRng(2)
        features = rng.normal((3, 8))
        phi = np.zeros((3, 2))
        phi[1, 0] = 1000.0
        att = T.softmax(Tensor(phi), axis=0)
        h = T.einsum("rf,ra->fa", Tensor(features), att)
        assert np.allclose(att.data[:, 0], [0.0, 1.0, 0.0], atol=1e-12)
        assert np.allclose(h.data[:, 0], features[1], atol=1e-9)

    def test_matches_composed_oracle(self):
        features, semantics, params = build_setup(21)
        out = encode(Tensor(features), semantics, params)
        h, attention, agreement = encoder_oracle(
            features, semantics.compact_vectors,
            params.proj.data, params.act_proj.data,
            params.em.transforms.data, params.em.beta.item(),
            params.em.gamma.item(), params.em.lam, params.em.iterations,
            params.inverted.iterations, params.em.sigma_floor,
            params.inverted.vote_transforms.data)
        assert np.allclose(out.agreement.data, agreement, atol=1e-9)
        assert np.allclose(out.attention.data, attention, atol=1e-9)
        assert np.allclose(out.h.data, h, atol=1e-9)

    def test_capsule_dim_mismatch(self):
        features, semantics, params = build_setup(3)
        bad = SemanticSpace(attr_vectors=semantics.attr_vectors,
                            compact_vectors=np.zeros((3, 6)),
                            class_attr=semantics.class_attr)
        with pytest.raises(DimensionError):
            encode(Tensor(features), bad, params)


class TestEncodeInvariants:
    def test_simplex_and_convex_hull(self):
        for seed in range(30):
            features, semantics, params = build_setup(100 + seed)
            out = encode(Tensor(features), semantics, params)
            att = out.attention.data
            assert np.all(att >= 0)
            assert np.allclose(att.sum(axis=0), 1.0, atol=1e-9)
            assert np.allclose(out.h.data, features.T @ att, atol=1e-9)

    def test_patch_permutation_equivariance(self):
        features, semantics, params = build_setup(7, r_patches=5)
        out = encode(Tensor(features), semantics, params)
        perm = SeededRng(0).permutation(5)
        out_p = encode(Tensor(features[perm]), semantics, params)
        assert np.allclose(out.attention.data[perm], out_p.attention.data,
                           atol=1e-9)
        assert np.allclose(out.h.data, out_p.h.data, atol=1e-9)

    def test_shapes_scale_with_dims(self):
        features, semantics, params = build_setup(8, r_patches=6, d_feat=12,
                                                  n_attr=5, tau=7)
        out = encode(Tensor(features), semantics, params)
        assert out.h.data.shape == (12, 5)
        assert out.attention.data.shape == (6, 5)
        assert np.allclose(out.attention.data.sum(axis=0), 1.0, atol=1e-9)
