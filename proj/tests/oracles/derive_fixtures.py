"""Independent reference values frozen into the unit tests.

Everything here is written from the model definitions with numpy / mpmath and
shares no code with the C++ library. Run: python3 derive_fixtures.py
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 40

TABLE1 = [
    (-6.66, -2.99, 0.72, 0.78, 0.27), (-14.17, -7.87, 4.73, 0.45, 1.44),
    (-12.88, -6.01, 10.31, 0.59, 1.77), (-8.71, -5.11, 0.30, 0.77, 0.10),
    (-8.70, -4.64, 0.14, 0.66, 0.05), (-10.60, -5.56, 0.58, 0.49, 0.18),
    (-11.36, -3.98, 0.30, 0.50, 0.27), (-17.93, -6.54, 5.82, 0.61, 1.31),
    (-6.55, -2.08, 0.41, 0.45, 0.11), (-10.26, -3.49, 0.20, 0.51, 0.04),
]


def table1():
    xs, us = [], []
    for x1, x2, s1, r, s2 in TABLE1:
        xs.append(np.array([x1, x2]))
        us.append(np.array([[s1 * s1, r * s1 * s2], [r * s1 * s2, s2 * s2]]))
    return xs, us


# Small p = 2, n = 3 instance shared with the C++ tests.
SMALL_X = [np.array([1.0, -0.5]), np.array([2.5, 0.7]), np.array([-0.3, 1.9])]
SMALL_U = [np.array([[0.8, 0.2], [0.2, 0.5]]), np.array([[1.5, -0.3], [-0.3, 0.9]]),
           np.array([[0.4, 0.1], [0.1, 1.2]])]
SMALL_PSI = np.array([[1.3, 0.4], [0.4, 0.7]])
SMALL_MU = np.array([0.9, 0.6])


def dup(p):
    cols = [(i, j) for j in range(p) for i in range(j, p)]
    g = np.zeros((p * p, len(cols)))
    for k, (i, j) in enumerate(cols):
        g[i + j * p, k] = 1
        g[j + i * p, k] = 1
    return g


def ref_prior(psi, us, n, family, d=4.0):
    p = psi.shape[0]
    pn = p * n
    if family == 'normal':
        j2 = pn * (pn + 2) / 4
    else:
        j2 = pn * (pn + 2) * (pn + d) / (4 * (pn + 2 + d))
    a = 2 * j2 / (2 * pn + pn * pn)
    b = j2 / (2 * pn + pn * pn) - 0.25
    A = [np.linalg.inv(psi + u) for u in us]
    P = sum(A)
    vecP = P.reshape(-1, order='F')
    inner = a * sum(np.kron(Ai, Ai) for Ai in A) + b * np.outer(vecP, vecP)
    G = dup(p)
    return 0.5 * np.linalg.slogdet(G.T @ inner @ G)[1], 0.5 * np.linalg.slogdet(P)[1]


def full_loglik_t(xs, us, psi, mu, d):
    p, n = len(mu), len(xs)
    N = p * n
    cov = mp.zeros(N, N)
    r = mp.zeros(N, 1)
    for i in range(n):
        for a in range(p):
            r[i * p + a] = mp.mpf(xs[i][a]) - mp.mpf(mu[a])
            for b in range(p):
                cov[i * p + a, i * p + b] = mp.mpf(psi[a, b]) + mp.mpf(us[i][a, b])
    q = (r.T * mp.inverse(cov) * r)[0]
    logK = mp.loggamma((d + N) / mp.mpf(2)) - mp.loggamma(mp.mpf(d) / 2) - (mp.mpf(N) / 2) * mp.log(mp.pi * d)
    return -mp.log(mp.det(cov)) / 2 + logK - (N + mp.mpf(d)) / 2 * mp.log(1 + q / d)


def full_loglik_normal(xs, us, psi, mu):
    p, n = len(mu), len(xs)
    N = p * n
    cov = np.zeros((N, N))
    r = np.zeros(N)
    for i in range(n):
        cov[i * p:(i + 1) * p, i * p:(i + 1) * p] = psi + us[i]
        r[i * p:(i + 1) * p] = xs[i] - mu
    return -0.5 * N * np.log(2 * np.pi) - 0.5 * np.linalg.slogdet(cov)[1] - 0.5 * r @ np.linalg.solve(cov, r)


def main():
    np.set_printoptions(precision=17)
    xs, us = table1()
    P = sum(np.linalg.inv(np.eye(2) + u) for u in us)
    print('precision_sum(Table1, I) =', repr(P.ravel()))
    psi = np.diag([5.0, 2.0])
    A = [np.linalg.inv(psi + u) for u in us]
    xt = np.linalg.solve(sum(A), sum(a @ x for a, x in zip(A, xs)))
    print('pooled_mean(Table1, diag(5,2)) =', repr(xt))
    mu = np.array([-9.63, -4.45])
    S = sum(np.outer(x - mu, x - mu) for x in xs)
    print('scatter(Table1, (-9.63,-4.45)) =', repr(S.ravel()))

    for fam in ('normal', 't'):
        r, half_logdet_p = ref_prior(SMALL_PSI, SMALL_U, 3, fam)
        print(f'small log_prior_reference[{fam}] = {r!r}  jeffreys = {r + half_logdet_p!r}')

    N = 20
    d = 4
    val = mp.loggamma((d + N) / mp.mpf(2)) - mp.loggamma(mp.mpf(d) / 2) - (mp.mpf(N) / 2) * mp.log(mp.pi * d) \
        - (N + mp.mpf(d)) / 2 * mp.log(1 + mp.mpf(5) / d)
    print('log_f t(d=4) p=2 n=10 u=5 =', mp.nstr(val, 20))

    j2 = mp.mpf(20 * 22 * 24) / (4 * 26)
    print('t j2 =', mp.nstr(j2, 20), 'a =', mp.nstr(2 * j2 / 440, 20), 'b =', mp.nstr(j2 / 440 - mp.mpf(1) / 4, 20))

    print('small log_likelihood t(d=4) =', mp.nstr(full_loglik_t(SMALL_X, SMALL_U, SMALL_PSI, SMALL_MU, 4), 20))
    print('small log_likelihood normal =', repr(full_loglik_normal(SMALL_X, SMALL_U, SMALL_PSI, SMALL_MU)))


if __name__ == '__main__':
    main()
