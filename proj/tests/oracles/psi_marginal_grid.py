"""Tensor-grid quadrature of the marginal posterior of Psi (p = 2, normal model).

Psi = L L^T with L = [[exp(a), 0], [c, exp(b)]]; the grid runs over (a, b, c)
and carries the Jacobian 4 L11^3 L22^2. Each grid point is
jittered uniformly inside its cell, which turns the rule into stratified
sampling with unbiased weighted quantiles. Prints moments and quantiles of
Psi_11, Psi_21, Psi_22 and the posterior mean of mu. Independent of the C++ code.
"""
import sys
import numpy as np

DATA = [
    (-6.66, -2.99, 0.72, 0.78, 0.27), (-14.17, -7.87, 4.73, 0.45, 1.44),
    (-12.88, -6.01, 10.31, 0.59, 1.77), (-8.71, -5.11, 0.30, 0.77, 0.10),
    (-8.70, -4.64, 0.14, 0.66, 0.05), (-10.60, -5.56, 0.58, 0.49, 0.18),
    (-11.36, -3.98, 0.30, 0.50, 0.27), (-17.93, -6.54, 5.82, 0.61, 1.31),
    (-6.55, -2.08, 0.41, 0.45, 0.11), (-10.26, -3.49, 0.20, 0.51, 0.04),
]


def dup2():
    g = np.zeros((4, 3))
    g[0, 0] = 1; g[1, 1] = 1; g[2, 1] = 1; g[3, 2] = 1
    return g


def log_post(p11, p21, p22, prior):
    n, p = len(DATA), 2
    P = np.zeros(p11.shape + (2, 2))
    w = np.zeros(p11.shape + (2,))
    sum_logdet = np.zeros(p11.shape)
    invs = []
    for x1, x2, s1, r, s2 in DATA:
        m11, m21, m22 = p11 + s1 * s1, p21 + r * s1 * s2, p22 + s2 * s2
        det = m11 * m22 - m21 * m21
        A = np.stack([np.stack([m22, -m21], -1), np.stack([-m21, m11], -1)], -2) / det[..., None, None]
        invs.append(A)
        P += A
        w += A @ np.array([x1, x2])
        sum_logdet += np.log(det)
    mu = np.linalg.solve(P, w[..., None])[..., 0]
    Q = np.zeros(p11.shape)
    for (x1, x2, *_), A in zip(DATA, invs):
        rr = np.array([x1, x2]) - mu
        Q += np.einsum('...i,...ij,...j->...', rr, A, rr)
    G = dup2()
    info = np.zeros(p11.shape + (4, 4))
    for A in invs:
        info += np.einsum('...ij,...kl->...ikjl', A, A).reshape(p11.shape + (4, 4))
    info *= 0.5  # normal generator: a = 1/2, b = 0
    red = G.T @ info @ G
    lp = 0.5 * np.linalg.slogdet(red)[1]
    logdetP = np.linalg.slogdet(P)[1]
    if prior == 'jeffreys':
        lp = lp + 0.5 * logdetP
    return lp - 0.5 * logdetP - 0.5 * sum_logdet - 0.5 * Q, mu


def wquantile(v, w, qs):
    o = np.argsort(v)
    c = np.cumsum(w[o]); c /= c[-1]
    return [v[o][np.searchsorted(c, q)] for q in qs]


def main(prior, n=120):
    a = np.linspace(-4.0, 4.5, n)
    b = np.linspace(-5.0, 3.5, n)
    c = np.linspace(-25.0, 25.0, 2 * n)
    A, B, C = np.meshgrid(a, b, c, indexing='ij')
    # Stratified jitter inside each cell keeps weighted quantiles off the lattice.
    rng = np.random.default_rng(12345)
    A = A + (rng.random(A.shape) - 0.5) * (a[1] - a[0])
    B = B + (rng.random(B.shape) - 0.5) * (b[1] - b[0])
    C = C + (rng.random(C.shape) - 0.5) * (c[1] - c[0])
    l11, l22 = np.exp(A), np.exp(B)
    p11, p21, p22 = l11 ** 2, C * l11, C ** 2 + l22 ** 2
    lp = np.empty(A.shape); mu1 = np.empty(A.shape); mu2 = np.empty(A.shape)
    for i in range(n):
        lp[i], mu = log_post(p11[i], p21[i], p22[i], prior)
        mu1[i], mu2[i] = mu[..., 0], mu[..., 1]
    lw = lp + np.log(4 * l11 ** 3 * l22 ** 2) + A + B  # d log L
    lw -= lw.max()
    wt = np.exp(lw).ravel()
    # edge mass check
    edge = wt.reshape(A.shape)
    print('edge mass', edge[[0, -1]].sum() / wt.sum(), edge[:, [0, -1]].sum() / wt.sum(), edge[:, :, [0, -1]].sum() / wt.sum())
    print('E[mu]', (wt * mu1.ravel()).sum() / wt.sum(), (wt * mu2.ravel()).sum() / wt.sum())
    for name, v in (('psi11', p11), ('psi21', p21), ('psi22', p22)):
        v = v.ravel()
        m = (wt * v).sum() / wt.sum()
        sd = np.sqrt((wt * (v - m) ** 2).sum() / wt.sum())
        print(name, 'mean %.3f sd %.3f' % (m, sd), 'q(1e-4, .025, .5, .975, .9501) =', ['%.3f' % x for x in wquantile(v, wt, [1e-4, 0.025, 0.5, 0.975, 0.9501])])


if __name__ == '__main__':
    main(sys.argv[1] if len(sys.argv) > 1 else 'jeffreys', int(sys.argv[2]) if len(sys.argv) > 2 else 60)
