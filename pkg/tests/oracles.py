"""Independent loop-level reference implementations used as test oracles.

Everything here is written with plain Python loops and math/mpmath so it
shares no code path with the library implementations it checks.
"""

import math

import numpy as np


def naive_matmul(a, b):
    m, k = a.shape
    k2, n = b.shape
    assert k == k2
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def naive_layer_norm(x, eps):
    n = len(x)
    mu = sum(x) / n
    var = sum((v - mu) ** 2 for v in x) / n
    return np.array([(v - mu) / math.sqrt(var + eps) for v in x])


def naive_softmax(x):
    m = max(x)
    e = [math.exp(v - m) for v in x]
    s = sum(e)
    return np.array([v / s for v in e])


def primary_capsules_oracle(f, proj, act_proj):
    """Per-capsule loops: poses from f @ proj reshaped, sigmoid activations."""
    d_feat = f.shape[0]
    n = act_proj.shape[1]
    d_cap = proj.shape[1] // n
    poses = np.zeros((n, d_cap))
    for c in range(n):
        for h in range(d_cap):
            acc = 0.0
            for t in range(d_feat):
                acc += f[t] * proj[t, c * d_cap + h]
            poses[c, h] = acc
    acts = np.zeros(n)
    for c in range(n):
        acc = 0.0
        for t in range(d_feat):
            acc += f[t] * act_proj[t, c]
        acts[c] = 1.0 / (1.0 + math.exp(-acc))
    return poses, acts


def em_routing_oracle(poses, acts, transforms, beta, gamma, lam, iterations,
                      sigma_floor, pose_mode="vector"):
    """Straight-line E/M recursion for a single parent capsule."""
    n, d_cap = poses.shape
    votes = np.zeros((n, d_cap))
    for i in range(n):
        if pose_mode == "matrix":
            p = transforms.shape[1]
            m = poses[i].reshape(p, p)
            votes[i] = (m @ transforms[i]).reshape(d_cap)
        else:
            for h in range(d_cap):
                acc = 0.0
                for e in range(d_cap):
                    acc += poses[i, e] * transforms[i, e, h]
                votes[i, h] = acc
    r = np.ones(n)  # E-step over a single parent
    mu = np.zeros(d_cap)
    act = 0.0
    for _ in range(iterations):
        w = np.array([acts[i] * r[i] for i in range(n)])
        denom = sum(w)
        for h in range(d_cap):
            mu[h] = sum(w[i] * votes[i, h] for i in range(n)) / denom
        var = np.zeros(d_cap)
        for h in range(d_cap):
            var[h] = max(sum(w[i] * (votes[i, h] - mu[h]) ** 2
                             for i in range(n)) / denom, sigma_floor)
        cost = np.zeros(d_cap)
        for h in range(d_cap):
            for i in range(n):
                ln_p = (-0.5 * math.log(2.0 * math.pi * var[h])
                        - (votes[i, h] - mu[h]) ** 2 / (2.0 * var[h]))
                cost[h] += -r[i] * ln_p
        logit = lam * (beta - gamma * sum(r) - sum(cost))
        act = 1.0 / (1.0 + math.exp(-logit))
        r = np.ones(n)
    return mu, act


def inverted_routing_oracle(children, parent_init, vote_transforms, iterations,
                            eps=1e-5):
    """Loop-level inverted dot-product attention routing."""
    r_n, d = children.shape
    a_n = parent_init.shape[0]
    votes = np.zeros((r_n, a_n, d))
    for i in range(r_n):
        for j in range(a_n):
            for h in range(d):
                acc = 0.0
                for e in range(d):
                    acc += vote_transforms[j, h, e] * children[i, e]
                votes[i, j, h] = acc
    parents = parent_init.copy()
    agreement = np.zeros((r_n, a_n))
    route = np.zeros((r_n, a_n))
    for _ in range(iterations):
        for i in range(r_n):
            for j in range(a_n):
                agreement[i, j] = sum(parents[j, h] * votes[i, j, h]
                                      for h in range(d))
        for i in range(r_n):
            route[i] = naive_softmax(agreement[i])
        new_parents = np.zeros_like(parents)
        for j in range(a_n):
            pooled = np.zeros(d)
            for i in range(r_n):
                pooled += route[i, j] * votes[i, j]
            new_parents[j] = naive_layer_norm(pooled, eps)
        parents = new_parents
    return parents, agreement, route


def encoder_oracle(patch_features, compact_vectors, proj, act_proj, transforms,
                   beta, gamma, lam, k_em, k_td, sigma_floor, vote_transforms,
                   pose_mode="vector", eps=1e-5):
    """Compose the primitive oracles into a full encoder forward pass."""
    r_n, d_feat = patch_features.shape
    d = compact_vectors.shape[1]
    g = np.zeros((r_n, d))
    for r in range(r_n):
        poses, acts = primary_capsules_oracle(patch_features[r], proj, act_proj)
        g[r], _ = em_routing_oracle(poses, acts, transforms, beta, gamma, lam,
                                    k_em, sigma_floor, pose_mode)
    _, agreement, _ = inverted_routing_oracle(g, compact_vectors,
                                              vote_transforms, k_td, eps)
    a_n = compact_vectors.shape[0]
    attention = np.zeros((r_n, a_n))
    for a in range(a_n):
        attention[:, a] = naive_softmax(agreement[:, a])
    h = np.zeros((d_feat, a_n))
    for a in range(a_n):
        for f in range(d_feat):
            h[f, a] = sum(attention[r, a] * patch_features[r, f]
                          for r in range(r_n))
    return h, attention, agreement


def factor_analysis_oracle(x, d, iterations, psi_floor=1e-6):
    """Second, independently written EM recursion for factor analysis."""
    x = np.asarray(x, dtype=np.float64)
    n, p = x.shape
    xc = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(xc, full_matrices=False)
    lam = np.zeros((p, d))
    k = min(d, len(s))
    for j in range(k):
        lam[:, j] = vt[j] * (s[j] / math.sqrt(n))
    psi = np.maximum(xc.var(axis=0) - (lam ** 2).sum(axis=1), psi_floor)
    sample_cov = (xc.T @ xc) / n
    for _ in range(iterations):
        beta_mat = np.linalg.inv(np.eye(d) + lam.T @ np.diag(1.0 / psi) @ lam)
        ez = xc @ np.diag(1.0 / psi) @ lam @ beta_mat
        sum_ezz = n * beta_mat + ez.T @ ez
        sum_xz = xc.T @ ez
        lam = sum_xz @ np.linalg.inv(sum_ezz)
        psi = np.maximum(np.diag(sample_cov) - np.diag(lam @ sum_xz.T) / n,
                         psi_floor)
    beta_mat = np.linalg.inv(np.eye(d) + lam.T @ np.diag(1.0 / psi) @ lam)
    return xc @ np.diag(1.0 / psi) @ lam @ beta_mat
