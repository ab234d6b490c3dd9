"""Per-modality regressors built directly on numpy.

All models standardize features and absorb the intercept by centering the
targets, so weights live in standardized coordinates and the bias term is
never penalized.  Nothing here clamps predictions; score clamping is a
reporting concern handled by the harness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class SingularMatrixError(ValueError):
    """OLS normal equations are singular; ridge regularization would help."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations; carries last-iterate info."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ---------------------------------------------------------------------------
# standardization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Standardizer:
    """Per-dimension z-scoring; constant dimensions map to exactly 0."""

    means: np.ndarray
    stds: np.ndarray  # zeros replaced by 1 at fit time

    def transform(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.means):
            raise ValueError(f"expected {len(self.means)} features, got {X.shape[1]}")
        return (X - self.means) / self.stds


def fit_standardizer(X) -> Standardizer:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("need a non-empty row matrix")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    stds = np.where(stds == 0.0, 1.0, stds)
    return Standardizer(means=means, stds=stds)


# ---------------------------------------------------------------------------
# linear family
# ---------------------------------------------------------------------------

LINEAR_KINDS = ("ols", "ridge", "lasso", "bayes_ridge")


@dataclass
class LinearModel:
    kind: str
    weights: np.ndarray  # in standardized feature space
    intercept: float
    hyper: dict
    standardizer: Standardizer
    history: dict = field(default_factory=dict)  # solver diagnostics

    def predict(self, X):
        Xs = self.standardizer.transform(X)
        return Xs @ self.weights + self.intercept


def _solve_spd(A, b):
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise SingularMatrixError(
            "normal equations are singular; use ridge with lam > 0") from None
    z = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, z)


def _lasso_cd(Xs, yc, lam, tol, max_sweeps):
    n, d = Xs.shape
    col_sq = (Xs * Xs).sum(axis=0) / n
    w = np.zeros(d)
    r = yc.copy()
    for sweep in range(max_sweeps):
        max_delta = 0.0
        for j in range(d):
            if col_sq[j] == 0.0:
                continue
            w_old = w[j]
            rho = (Xs[:, j] @ r) / n + col_sq[j] * w_old
            w_new = np.sign(rho) * max(abs(rho) - lam, 0.0) / col_sq[j]
            if w_new != w_old:
                r += Xs[:, j] * (w_old - w_new)
                w[j] = w_new
                max_delta = max(max_delta, abs(w_new - w_old))
        if max_delta < tol:
            return w, sweep + 1
    raise ConvergenceError(
        f"lasso did not converge in {max_sweeps} sweeps",
        diagnostics={"max_delta": max_delta, "weights": w.tolist()},
    )


def _bayes_ridge(Xs, yc, hyper):
    """Evidence maximization: alternate the closed-form posterior mean with
    noise/prior precision re-estimation (gamma hyperpriors, constants 1e-6).
    """
    n, d = Xs.shape
    a1 = a2 = l1 = l2 = 1e-6
    max_iter = int(hyper.get("max_iter", 300))
    tol = float(hyper.get("tol", 1e-4))

    gram = Xs.T @ Xs
    Xty = Xs.T @ yc
    eigvals, V = np.linalg.eigh(gram)
    eigvals = np.clip(eigvals, 0.0, None)
    Vty = V.T @ Xty

    fixed_noise = hyper.get("fixed_alpha_noise")
    fixed_prior = hyper.get("fixed_lambda_prior")
    y_var = float(yc @ yc) / n
    alpha = float(fixed_noise) if fixed_noise is not None else (1.0 / y_var if y_var > 0 else 1.0)
    lam = float(fixed_prior) if fixed_prior is not None else 1.0

    def posterior_mean(alpha, lam):
        return V @ (alpha * Vty / (alpha * eigvals + lam))

    def log_evidence(alpha, lam, mu, sse):
        logdet_A = float(np.sum(np.log(alpha * eigvals + lam)))
        return 0.5 * (d * np.log(lam) + n * np.log(alpha)
                      - alpha * sse - lam * float(mu @ mu)
                      - logdet_A - n * np.log(2.0 * np.pi))

    evidence = []
    for it in range(max_iter):
        mu = posterior_mean(alpha, lam)
        resid = yc - Xs @ mu
        sse = float(resid @ resid)
        evidence.append(log_evidence(alpha, lam, mu, sse))

        # EM-style re-estimation: monotone in the evidence, unlike the
        # fixed-point (effective-dof) variant which can dip by ~1e-9.
        den = alpha * eigvals + lam
        tr_cov = float(np.sum(1.0 / den))
        tr_xcovx = float(np.sum(eigvals / den))
        new_lam = lam if fixed_prior is not None else \
            (d + 2 * l1) / (float(mu @ mu) + tr_cov + 2 * l2)
        new_alpha = alpha if fixed_noise is not None else \
            (n + 2 * a1) / (sse + tr_xcovx + 2 * a2)

        rel = max(abs(new_lam - lam) / max(abs(lam), 1e-300),
                  abs(new_alpha - alpha) / max(abs(alpha), 1e-300))
        lam, alpha = new_lam, new_alpha
        if rel < tol:
            mu = posterior_mean(alpha, lam)
            resid = yc - Xs @ mu
            sse = float(resid @ resid)
            evidence.append(log_evidence(alpha, lam, mu, sse))
            return mu, {"alpha_noise": alpha, "lambda_prior": lam,
                        "iterations": it + 1, "log_evidence": evidence}
    raise ConvergenceError(
        f"bayes_ridge did not converge in {max_iter} iterations",
        diagnostics={"alpha_noise": alpha, "lambda_prior": lam, "log_evidence": evidence},
    )


def fit_linear(X, y, kind="ridge", hyper=None) -> LinearModel:
    """Fit one of ols / ridge / lasso / bayes_ridge on standardized features."""
    if kind not in LINEAR_KINDS:
        raise ValueError(f"unknown linear kind {kind!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y) or len(y) < 2:
        raise ValueError("need a row matrix with matching targets, >= 2 rows")
    hyper = dict(hyper or {})

    std = fit_standardizer(X)
    Xs = std.transform(X)
    y_mean = float(y.mean())
    yc = y - y_mean

    history = {}
    if kind == "ols":
        w = _solve_spd(Xs.T @ Xs, Xs.T @ yc)
    elif kind == "ridge":
        lam = float(hyper.setdefault("lam", 1.0))
        if lam < 0:
            raise ValueError("ridge lam must be >= 0")
        gram = Xs.T @ Xs + lam * np.eye(Xs.shape[1])
        w = _solve_spd(gram, Xs.T @ yc)
    elif kind == "lasso":
        lam = float(hyper.setdefault("lam", 0.1))
        tol = float(hyper.setdefault("tol", 1e-7))
        max_sweeps = int(hyper.setdefault("max_sweeps", 10000))
        w, sweeps = _lasso_cd(Xs, yc, lam, tol, max_sweeps)
        history["sweeps"] = sweeps
    else:  # bayes_ridge
        w, history = _bayes_ridge(Xs, yc, hyper)
        hyper.setdefault("alpha_noise", history["alpha_noise"])
        hyper.setdefault("lambda_prior", history["lambda_prior"])

    return LinearModel(kind=kind, weights=w, intercept=y_mean,
                       hyper=hyper, standardizer=std, history=history)


# ---------------------------------------------------------------------------
# epsilon-SVR via SMO
# ---------------------------------------------------------------------------

SVR_KERNELS = ("rbf", "linear")


@dataclass
class SvrModel:
    kernel: str
    gamma: float
    C: float
    epsilon: float
    support_vectors: np.ndarray  # standardized rows with nonzero dual coef
    dual_coefs: np.ndarray
    bias: float
    standardizer: Standardizer
    history: dict = field(default_factory=dict)

    def predict(self, X):
        Xs = self.standardizer.transform(X)
        if len(self.dual_coefs) == 0:
            return np.full(Xs.shape[0], self.bias)
        K = _kernel_matrix(self.kernel, self.gamma, self.support_vectors, Xs)
        return self.dual_coefs @ K + self.bias


def _kernel_matrix(kernel, gamma, A, B):
    if kernel == "linear":
        return A @ B.T
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * (A @ B.T)
    return np.exp(-gamma * np.clip(sq, 0.0, None))


def fit_svr(X, y, kernel="rbf", gamma=None, C=1.0, epsilon=0.1,
            tol=1e-3, max_iter=1_000_000) -> SvrModel:
    """Solve the epsilon-insensitive dual by SMO on maximal-violating pairs.

    Works in the split (a, a*) box [0, C]^(2n) with the equality constraint
    sum(a) - sum(a*) = 0; stops when the max KKT violation drops to `tol`.
    """
    if kernel not in SVR_KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}")
    if C <= 0 or epsilon < 0:
        raise ValueError("need C > 0 and epsilon >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != len(y) or len(y) < 2:
        raise ValueError("need a row matrix with matching targets, >= 2 rows")

    std = fit_standardizer(X)
    Xs = std.transform(X)
    n, d = Xs.shape
    if gamma is None:
        total_var = float(Xs.var())
        gamma = 1.0 / (d * total_var) if total_var > 0 else 1.0 / d

    K = _kernel_matrix(kernel, gamma, Xs, Xs)
    a = np.zeros(n)       # alpha (pushes predictions up)
    a_star = np.zeros(n)  # alpha* (pushes predictions down)
    u = np.zeros(n)       # current sum_j beta_j K_ij

    def violation_and_pair():
        # -s*G values: G_alpha = u + eps - y, G_alpha* = -u + eps + y
        up_vals = y - u - epsilon      # from alpha side (s = +1)
        dn_vals = y - u + epsilon      # from alpha* side (s = -1)
        m_val, m_arg, m_side = -np.inf, -1, 0
        M_val, M_arg, M_side = np.inf, -1, 0
        # I_up: alpha < C or alpha* > 0 (room to move the pair variable "up")
        for vals, mask, side in ((up_vals, a < C, 1), (dn_vals, a_star > 0.0, -1)):
            if mask.any():
                idx = np.argmax(np.where(mask, vals, -np.inf))
                if vals[idx] > m_val:
                    m_val, m_arg, m_side = vals[idx], int(idx), side
        # I_low: alpha > 0 or alpha* < C
        for vals, mask, side in ((up_vals, a > 0.0, 1), (dn_vals, a_star < C, -1)):
            if mask.any():
                idx = np.argmin(np.where(mask, vals, np.inf))
                if vals[idx] < M_val:
                    M_val, M_arg, M_side = vals[idx], int(idx), side
        return m_val, m_arg, m_side, M_val, M_arg, M_side

    iterations = 0
    while True:
        m_val, p, p_side, M_val, q, q_side = violation_and_pair()
        if m_val - M_val <= tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError(
                f"SVR SMO did not converge in {max_iter} pair updates",
                diagnostics={"kkt_violation": m_val - M_val},
            )
        iterations += 1

        eta = K[p, p] + K[q, q] - 2.0 * K[p, q]
        t = (m_val - M_val) / max(eta, 1e-12)
        # box room along the constraint-preserving direction
        room_p = C - a[p] if p_side == 1 else a_star[p]
        room_q = a[q] if q_side == 1 else C - a_star[q]
        t = min(t, room_p, room_q)
        if t <= 0.0:
            break  # numerically stuck at the box; violation is within noise

        if p_side == 1:
            a[p] += t
        else:
            a_star[p] -= t
        if q_side == 1:
            a[q] -= t
        else:
            a_star[q] += t
        # beta_p grows by t, beta_q shrinks by t regardless of side
        u += t * (K[p] - K[q])

    m_val, _, _, M_val, _, _ = violation_and_pair()
    if np.isfinite(m_val) and np.isfinite(M_val):
        bias = 0.5 * (m_val + M_val)
    else:
        bias = float(np.mean(y - u))  # every dual variable at a bound
    beta = a - a_star
    sv = np.abs(beta) > 1e-12
    return SvrModel(kernel=kernel, gamma=float(gamma), C=float(C), epsilon=float(epsilon),
                    support_vectors=Xs[sv], dual_coefs=beta[sv], bias=float(bias),
                    standardizer=std,
                    history={"iterations": iterations,
                             "kkt_violation": float(max(m_val - M_val, 0.0))})


def predict(model, X):
    """Raw (unclamped) scores from a fitted linear or SVR model."""
    return model.predict(X)


# ---------------------------------------------------------------------------
# model artifacts
# ---------------------------------------------------------------------------

def model_to_dict(model) -> dict:
    std = {"means": model.standardizer.means.tolist(),
           "stds": model.standardizer.stds.tolist()}
    if isinstance(model, LinearModel):
        return {"family": "linear", "kind": model.kind,
                "weights": model.weights.tolist(), "intercept": model.intercept,
                "hyper": model.hyper, "standardizer": std}
    if isinstance(model, SvrModel):
        return {"family": "svr", "kernel": model.kernel, "gamma": model.gamma,
                "C": model.C, "epsilon": model.epsilon,
                "support_vectors": model.support_vectors.tolist(),
                "dual_coefs": model.dual_coefs.tolist(), "bias": model.bias,
                "standardizer": std}
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_from_dict(doc) -> LinearModel | SvrModel:
    std = Standardizer(means=np.asarray(doc["standardizer"]["means"], dtype=float),
                       stds=np.asarray(doc["standardizer"]["stds"], dtype=float))
    if doc["family"] == "linear":
        return LinearModel(kind=doc["kind"], weights=np.asarray(doc["weights"], dtype=float),
                           intercept=float(doc["intercept"]), hyper=dict(doc["hyper"]),
                           standardizer=std)
    if doc["family"] == "svr":
        return SvrModel(kernel=doc["kernel"], gamma=float(doc["gamma"]), C=float(doc["C"]),
                        epsilon=float(doc["epsilon"]),
                        support_vectors=np.asarray(doc["support_vectors"], dtype=float).reshape(
                            (-1, len(doc["standardizer"]["means"]))),
                        dual_coefs=np.asarray(doc["dual_coefs"], dtype=float),
                        bias=float(doc["bias"]), standardizer=std)
    raise ValueError(f"unknown model family {doc.get('family')!r}")


def save_model(model, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
