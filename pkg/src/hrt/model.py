"""Full model: parameter container, seeded initialization, forward pass."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError
from .tensor import Tensor
from .rng import SeededRng
from .routing import EmRoutingParams, InvertedRoutingParams
from .encoder import AlignedFeatures, EncoderParams, encode
from .decoder import (DecoderParams, adjust_class_attributes, class_scores,
                      content_attribute_scores)
from .semantics import SemanticSpace, compact_semantics


@dataclass
class ModelConfig:
    """Shape and routing configuration; desk-scale defaults."""

    r_patches: int = 9
    d_feat: int = 64
    num_attributes: int = 12
    num_classes: int = 12
    tau: int = 32
    d_cap: int = 16
    n_primary: int = 128
    k_em: int = 5
    k_td: int = 2
    em_lambda: float = 1.0
    sigma_floor: float = 1e-6
    layer_norm_eps: float = 1e-5
    pose_mode: str = "matrix"          # "matrix" or "vector"
    compaction: str = "factor-analysis"  # or "pca" / "precomputed"

    def validate(self) -> None:
        if self.pose_mode == "matrix":
            p = int(round(self.d_cap ** 0.5))
            if p * p != self.d_cap:
                raise ConfigError(
                    f"matrix pose_mode needs a square d_cap, got {self.d_cap}")
        elif self.pose_mode != "vector":
            raise ConfigError(f"unknown pose_mode {self.pose_mode!r}")
        for name in ("r_patches", "d_feat", "num_attributes", "num_classes",
                     "tau", "d_cap", "n_primary", "k_em", "k_td"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")


@dataclass
class ForwardResult:
    scores: Tensor            # [C]
    psi: Tensor               # [A]
    z_tilde: Tensor           # [C, A]
    aligned: AlignedFeatures


class HrtModel:
    """Encoder + decoder parameters with a seeded-uniform initialization.

    Weights are drawn uniformly in +-1/sqrt(fan_in); attribute capsules are
    initialized from the compacted attribute vectors, which are computed once
    at construction and cached.
    """

    def __init__(self, config: ModelConfig, semantics: SemanticSpace,
                 seed: int = 0):
        config.validate()
        if semantics.num_attributes != config.num_attributes:
            raise ConfigError(
                f"semantic space has {semantics.num_attributes} attributes, "
                f"config says {config.num_attributes}")
        if semantics.class_attr.shape[0] != config.num_classes:
            raise ConfigError(
                f"semantic space has {semantics.class_attr.shape[0]} classes, "
                f"config says {config.num_classes}")
        if semantics.compact_vectors.shape[1] != config.d_cap:
            raise ConfigError(
                f"compacted attribute vectors have dim "
                f"{semantics.compact_vectors.shape[1]}, routing capsules need "
                f"{config.d_cap}")
        self.config = config
        self.semantics = semantics
        self.seed = seed
        rng = SeededRng(seed)
        c = config
        p = int(round(c.d_cap ** 0.5)) if c.pose_mode == "matrix" else c.d_cap

        def uniform(shape, fan_in):
            lim = 1.0 / np.sqrt(fan_in)
            return Tensor(rng.uniform(shape, -lim, lim), requires_grad=True)

        self.params: dict[str, Tensor] = {
            "enc.proj": uniform((c.d_feat, c.n_primary * c.d_cap), c.d_feat),
            "enc.act_proj": uniform((c.d_feat, c.n_primary), c.d_feat),
            "enc.transforms": uniform((c.n_primary, p, p), p),
            "enc.beta": Tensor(np.zeros(()), requires_grad=True),
            "enc.gamma": Tensor(np.zeros(()), requires_grad=True),
            "enc.vote_transforms": uniform((c.num_attributes, c.d_cap, c.d_cap),
                                           c.d_cap),
            "dec.w_beta": uniform((c.tau, c.d_feat), c.tau),
            "dec.w_d": uniform((c.d_feat, c.tau), c.d_feat),
        }

    @classmethod
    def build(cls, config: ModelConfig, attr_vectors: np.ndarray,
              class_attr: np.ndarray, seed: int = 0,
              precomputed_compact: np.ndarray | None = None) -> "HrtModel":
        """Construct semantics (with compaction) and the model in one go."""
        compact = compact_semantics(attr_vectors, config.d_cap,
                                    method=config.compaction,
                                    precomputed=precomputed_compact)
        semantics = SemanticSpace(attr_vectors=attr_vectors,
                                  compact_vectors=compact,
                                  class_attr=class_attr)
        return cls(config, semantics, seed=seed)

    # -- parameter bundles ---------------------------------------------------

    def encoder_params(self) -> EncoderParams:
        c = self.config
        return EncoderParams(
            proj=self.params["enc.proj"],
            act_proj=self.params["enc.act_proj"],
            em=EmRoutingParams(transforms=self.params["enc.transforms"],
                               beta=self.params["enc.beta"],
                               gamma=self.params["enc.gamma"],
                               lam=c.em_lambda,
                               iterations=c.k_em,
                               sigma_floor=c.sigma_floor,
                               pose_mode=c.pose_mode),
            inverted=InvertedRoutingParams(
                vote_transforms=self.params["enc.vote_transforms"],
                iterations=c.k_td,
                layer_norm_eps=c.layer_norm_eps))

    def decoder_params(self) -> DecoderParams:
        return DecoderParams(w_beta=self.params["dec.w_beta"],
                             w_d=self.params["dec.w_d"])

    # -- forward -------------------------------------------------------------

    def forward(self, patch_features: Tensor) -> ForwardResult:
        aligned = encode(patch_features, self.semantics, self.encoder_params())
        dec = self.decoder_params()
        z_tilde = adjust_class_attributes(aligned, self.semantics, dec)
        psi = content_attribute_scores(aligned, self.semantics, dec)
        scores = class_scores(psi, z_tilde)
        return ForwardResult(scores=scores, psi=psi, z_tilde=z_tilde,
                             aligned=aligned)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def config_dict(self) -> dict:
        return asdict(self.config)
