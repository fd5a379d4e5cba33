"""Material classifier: standardization + PCA, Wilcoxon feature ranking,
one-vs-all ECOC over linear max-margin learners, Platt calibration,
stratified cross-validation and ROC/AUC reporting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import DegenerateTraining, InsufficientData, InvalidInput

MODEL_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# standardization + PCA

@dataclass
class StandardizerPca:
    mean: np.ndarray            # per-feature mean (original dimension)
    std: np.ndarray             # per-feature std; zero-variance features dropped
    keep: np.ndarray            # bool mask of retained (non-constant) features
    components: np.ndarray      # (k, n_kept) orthonormal rows
    explained_variance: np.ndarray
    variance_fraction: float

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        z = (x - self.mean)[..., self.keep] / self.std[self.keep]
        return z @ self.components.T


def fit_standardizer_pca(x: np.ndarray, variance_fraction: float = 0.95) -> StandardizerPca:
    """Z-score, then keep the minimal number of principal components whose
    cumulative explained variance reaches `variance_fraction`.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InsufficientData("need at least 2 samples")
    if not 0.0 < variance_fraction <= 1.0:
        raise InvalidInput("variance_fraction must be in (0, 1]")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    keep = std > 1e-12
    if not keep.any():
        raise InsufficientData("all features constant")
    z = (x - mean)[:, keep] / std[keep]
    # SVD of the centered, scaled data; eigenvalues of the covariance.
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    ev = s**2 / x.shape[0]
    total = ev.sum()
    if total <= 0.0:
        k = 1
    else:
        cum = np.cumsum(ev) / total
        k = int(np.searchsorted(cum, variance_fraction - 1e-12) + 1)
        k = min(k, len(ev))
    comps = vt[:k]
    # deterministic sign: largest-magnitude loading positive
    for row in comps:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return StandardizerPca(mean, std, keep, comps, ev[:k], variance_fraction)


# ---------------------------------------------------------------------------
# Wilcoxon rank-sum

def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sv = values[order]
    i = 0
    while i < len(sv):
        j = i
        while j + 1 < len(sv) and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def ranksum_p(a, b) -> float:
    """Two-sided Wilcoxon rank-sum p-value.

    Exact enumeration over all group assignments when n + m <= 12 (handles
    ties via midranks); otherwise the normal approximation with tie and
    continuity corrections.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        raise InsufficientData("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = _midranks(pooled)
    w_obs = ranks[:n].sum()
    if n + m <= 12:
        total = 0
        le = 0
        ge = 0
        eps = 1e-9
        for subset in combinations(range(n + m), n):
            w = ranks[list(subset)].sum()
            total += 1
            if w <= w_obs + eps:
                le += 1
            if w >= w_obs - eps:
                ge += 1
        return min(1.0, 2.0 * min(le, ge) / total)
    mu = n * (n + m + 1) / 2.0
    nm = n + m
    _, counts = np.unique(pooled, return_counts=True)
    tie = (counts**3 - counts).sum()
    sigma2 = n * m / 12.0 * ((nm + 1) - tie / (nm * (nm - 1)))
    if sigma2 <= 0.0:
        return 1.0
    z = (w_obs - mu - 0.5 * np.sign(w_obs - mu)) / math.sqrt(sigma2)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def rank_features(x: np.ndarray, labels, class_pair) -> list[int]:
    """Feature indices sorted ascending by rank-sum p between two classes."""
    labels = np.asarray(labels)
    ca, cb = class_pair
    ma, mb = labels == ca, labels == cb
    if not ma.any() or not mb.any():
        raise InsufficientData(f"class pair {class_pair} not fully present")
    x = np.asarray(x, dtype=np.float64)
    ps = [ranksum_p(x[ma, j], x[mb, j]) for j in range(x.shape[1])]
    return sorted(range(x.shape[1]), key=lambda j: (ps[j], j))


# ---------------------------------------------------------------------------
# linear max-margin learner (SMO on the dual)

@dataclass
class LinearLearner:
    weights: np.ndarray
    bias: float
    C: float
    platt_a: float = 0.0
    platt_b: float = 0.0

    def score(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) @ self.weights + self.bias

    def posterior(self, x: np.ndarray) -> np.ndarray:
        return platt_posterior(self.score(x), self.platt_a, self.platt_b)


def svm_objective(w: np.ndarray, b: float, x: np.ndarray, y: np.ndarray, C: float) -> float:
    """Primal objective 0.5*(||w||^2 + b^2) + C * sum hinge(y * (w.x + b)).

    The bias enters the regularizer because the learner treats it as the
    weight of a constant unit feature.
    """
    margins = y * (x @ w + b)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return 0.5 * (float(w @ w) + b * b) + C * float(hinge)


def train_linear(x: np.ndarray, y: np.ndarray, C: float = 1.0, seed: int = 0) -> LinearLearner:
    """L1-loss linear max-margin learner trained by dual coordinate descent.

    The bias is a constant unit feature appended to x (so it is regularized
    together with the weights). Coordinates are visited in seeded random
    permutations; iteration stops at a relative duality gap of 1e-6 or after
    300 epochs (the dual objective improves monotonically, so the cap only
    trims the slowly-converging tail of non-separable problems).
    Deterministic for fixed inputs and seed.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise DegenerateTraining("need both +1 and -1 labels")
    if C <= 0.0:
        raise InvalidInput("C must be positive")
    n = len(y)
    xa = np.hstack([x, np.ones((n, 1))])
    q = np.einsum("ij,ij->i", xa, xa)  # diagonal of the dual Hessian
    yx = y[:, None] * xa
    alpha = np.zeros(n)
    w = np.zeros(xa.shape[1])
    gap_tol = 1e-6
    rng = np.random.default_rng([seed, n])
    for _ in range(300):
        for i in rng.permutation(n):
            g = y[i] * float(w @ xa[i]) - 1.0
            a_old = alpha[i]
            if (a_old <= 0.0 and g >= 0.0) or (a_old >= C and g <= 0.0):
                continue
            a_new = min(max(a_old - g / q[i], 0.0), C)
            if a_new != a_old:
                alpha[i] = a_new
                w += (a_new - a_old) * yx[i]
        margins = y * (xa @ w)
        primal = 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())
        dual = float(alpha.sum()) - 0.5 * float(w @ w)
        if primal - dual <= gap_tol * max(1.0, abs(primal)):
            break
    return LinearLearner(weights=w[:-1], bias=float(w[-1]), C=C)


# ---------------------------------------------------------------------------
# Platt calibration

def platt_posterior(scores: np.ndarray, a: float, b: float) -> np.ndarray:
    z = a * np.asarray(scores, dtype=np.float64) + b
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = np.exp(-z[pos]) / (1.0 + np.exp(-z[pos]))
    out[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
    return out


def platt_nll(scores, labels, a: float, b: float) -> float:
    """Negative log-likelihood of the sigmoid fit with Platt's smoothed targets."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels > 0).sum())
    n_neg = len(labels) - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(labels > 0, hi, lo)
    return _platt_nll_tz(scores, t, a, b)


def _platt_nll_tz(scores, t, a, b) -> float:
    # With p = 1/(1 + e^z) and z = a*s + b the per-sample loss
    # -t*log(p) - (1-t)*log(1-p) equals t*z + log(1 + e^(-z)).
    z = a * scores + b
    return float(np.sum(t * z + np.logaddexp(0.0, -z)))


def platt_fit(scores, labels) -> tuple[float, float]:
    """Fit sigmoid parameters (a, b) minimizing the Platt-smoothed NLL of
    P(y=1 | s) = 1 / (1 + exp(a*s + b)) by damped Newton iteration.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels > 0).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateTraining("both classes required for calibration")
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(labels > 0, hi, lo)

    a = 0.0
    b = math.log((n_neg + 1.0) / (n_pos + 1.0))
    nll = _platt_nll_tz(scores, t, a, b)
    for _ in range(200):
        z = a * scores + b
        p = platt_posterior(scores, a, b)
        d1 = t - p  # d NLL / dz per sample
        grad_a = float((d1 * scores).sum())
        grad_b = float(d1.sum())
        if math.hypot(grad_a, grad_b) <= 1e-8:
            break
        d2 = p * (1.0 - p)
        haa = float((d2 * scores * scores).sum()) + 1e-12
        hab = float((d2 * scores).sum())
        hbb = float(d2.sum()) + 1e-12
        det = haa * hbb - hab * hab
        if det <= 0.0:
            step_a, step_b = grad_a, grad_b
        else:
            step_a = (hbb * grad_a - hab * grad_b) / det
            step_b = (haa * grad_b - hab * grad_a) / det
        stepsize = 1.0
        for _ in range(60):
            na, nb = a - stepsize * step_a, b - stepsize * step_b
            nn = _platt_nll_tz(scores, t, na, nb)
            if nn <= nll + 1e-15:
                a, b, nll = na, nb, nn
                break
            stepsize *= 0.5
        else:
            break
    return a, b


# ---------------------------------------------------------------------------
# ECOC model

@dataclass
class EcocModel:
    classes: list[str]
    coding: np.ndarray          # K x K, +1 diagonal, -1 off-diagonal
    learners: list[LinearLearner]
    standardizer: StandardizerPca
    seed: int
    params: dict = field(default_factory=dict)
    version: int = MODEL_FORMAT_VERSION

    def to_json(self) -> str:
        def arr(a):
            return np.asarray(a).tolist()

        doc = {
            "format_version": self.version,
            "classes": list(self.classes),
            "coding": arr(self.coding.astype(int)),
            "seed": int(self.seed),
            "params": self.params,
            "standardizer": {
                "mean": arr(self.standardizer.mean),
                "std": arr(self.standardizer.std),
                "keep": [bool(v) for v in self.standardizer.keep],
                "components": arr(self.standardizer.components),
                "explained_variance": arr(self.standardizer.explained_variance),
                "variance_fraction": float(self.standardizer.variance_fraction),
            },
            "learners": [
                {
                    "weights": arr(l.weights),
                    "bias": float(l.bias),
                    "C": float(l.C),
                    "platt_a": float(l.platt_a),
                    "platt_b": float(l.platt_b),
                }
                for l in self.learners
            ],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EcocModel":
        doc = json.loads(text)
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise InvalidInput(f"unsupported model version {doc.get('format_version')}")
        std = doc["standardizer"]
        standardizer = StandardizerPca(
            mean=np.array(std["mean"]),
            std=np.array(std["std"]),
            keep=np.array(std["keep"], dtype=bool),
            components=np.array(std["components"]),
            explained_variance=np.array(std["explained_variance"]),
            variance_fraction=std["variance_fraction"],
        )
        learners = [
            LinearLearner(
                weights=np.array(l["weights"]),
                bias=l["bias"],
                C=l["C"],
                platt_a=l["platt_a"],
                platt_b=l["platt_b"],
            )
            for l in doc["learners"]
        ]
        return cls(
            classes=doc["classes"],
            coding=np.array(doc["coding"], dtype=np.int64),
            learners=learners,
            standardizer=standardizer,
            seed=doc["seed"],
            params=doc["params"],
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "EcocModel":
        with open(path) as fh:
            return cls.from_json(fh.read())


def balance_classes(labels, seed: int) -> np.ndarray:
    """Indices of a seeded down-sampling of every class to the minority count."""
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    counts = {c: int((labels == c).sum()) for c in classes}
    m = min(counts.values())
    rng = np.random.default_rng(seed)
    kept = []
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) > m:
            idx = np.sort(rng.choice(idx, size=m, replace=False))
        kept.append(idx)
    return np.concatenate(kept)


def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold assignment (length n) with per-class round-robin dealing after a
    seeded shuffle; class proportions per fold are within one sample of the
    global proportions.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=np.int64)
    for c in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == c)
        perm = rng.permutation(len(idx))
        folds[idx[perm]] = np.arange(len(idx)) % k
    return folds


def train_ecoc(
    x: np.ndarray,
    labels,
    classes: list[str] | None = None,
    C: float = 1.0,
    seed: int = 0,
    variance_fraction: float = 0.95,
    calibration_folds: int = 10,
) -> EcocModel:
    """Train the one-vs-all ECOC classifier.

    Balances classes by seeded down-sampling to the minority count, fits the
    standardizer/PCA on the balanced set, trains one linear learner per
    class, and Platt-fits each learner on its stratified out-of-fold scores.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    if classes is None:
        classes = sorted(set(labels.tolist()))
    classes = list(classes)
    if len(classes) < 2:
        raise InsufficientData("need at least 2 classes")
    for c in classes:
        if int((labels == c).sum()) < 2:
            raise InsufficientData(f"class {c!r} has fewer than 2 samples")

    kept = balance_classes(labels, seed)
    xb, yb = x[kept], labels[kept]
    min_count = min(int((yb == c).sum()) for c in classes)
    k = min(calibration_folds, min_count)
    standardizer = fit_standardizer_pca(xb, variance_fraction)
    zb = standardizer.transform(xb)
    folds = stratified_folds(yb, k, seed + 1)

    coding = -np.ones((len(classes), len(classes)), dtype=np.int64)
    np.fill_diagonal(coding, 1)

    learners = []
    for c in classes:
        ybin = np.where(yb == c, 1.0, -1.0)
        oof = np.empty(len(yb))
        for fi in range(k):
            tr = folds != fi
            fold_learner = train_linear(zb[tr], ybin[tr], C=C, seed=seed)
            oof[~tr] = fold_learner.score(zb[~tr])
        learner = train_linear(zb, ybin, C=C, seed=seed)
        learner.platt_a, learner.platt_b = platt_fit(oof, ybin)
        learners.append(learner)

    return EcocModel(
        classes=classes,
        coding=coding,
        learners=learners,
        standardizer=standardizer,
        seed=seed,
        params={
            "C": C,
            "variance_fraction": variance_fraction,
            "calibration_folds": k,
        },
    )


def predict_posterior(model: EcocModel, features: np.ndarray) -> np.ndarray:
    """Per-class posteriors for one feature vector or a batch.

    Per-learner Platt posteriors are renormalized to sum 1 over classes;
    argmax is the predicted class (ties resolved by class-list order).
    """
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    batch = features[None, :] if single else features
    if batch.shape[1] != len(model.standardizer.mean):
        raise InvalidInput(
            f"expected {len(model.standardizer.mean)} features, got {batch.shape[1]}"
        )
    z = model.standardizer.transform(batch)
    raw = np.column_stack([l.posterior(z) for l in model.learners])
    totals = raw.sum(axis=1, keepdims=True)
    post = np.where(totals > 0, raw / np.where(totals > 0, totals, 1.0), 1.0 / raw.shape[1])
    return post[0] if single else post


def predict_class(model: EcocModel, features: np.ndarray) -> str:
    post = predict_posterior(model, features)
    return model.classes[int(np.argmax(post))]


def cross_validate(
    x: np.ndarray,
    labels,
    k: int = 10,
    C: float = 1.0,
    seed: int = 0,
    variance_fraction: float = 0.95,
) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Stratified k-fold out-of-fold posteriors.

    Returns (posteriors (n, K), fold assignment (n,), classes). Each sample
    is scored by the model whose training folds exclude it.
    """
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels)
    classes = sorted(set(labels.tolist()))
    for c in classes:
        if int((labels == c).sum()) < k:
            raise InsufficientData(f"class {c!r} has fewer than {k} samples")
    folds = stratified_folds(labels, k, seed)
    post = np.empty((len(labels), len(classes)))
    for fi in range(k):
        tr = folds != fi
        model = train_ecoc(
            x[tr], labels[tr], classes=classes, C=C, seed=seed,
            variance_fraction=variance_fraction,
        )
        post[~tr] = predict_posterior(model, x[~tr])
    return post, folds, classes


# ---------------------------------------------------------------------------
# ROC / AUC

@dataclass
class RocCurve:
    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def _trapezoid_auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    pts = np.vstack([np.append(fpr, [0.0, 1.0]), np.append(tpr, [0.0, 1.0])]).T
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))


def roc_auc(scores, labels, thresholds: np.ndarray | None = None) -> RocCurve:
    """ROC curve over a fixed threshold sweep (default 0..1 step 0.01).

    A sample is predicted positive when its score >= threshold. AUC is the
    trapezoidal area of the sweep augmented with (0,0) and (1,1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels > 0
    neg = ~pos
    if not pos.any() or not neg.any():
        raise InsufficientData("both labels required for a ROC curve")
    if thresholds is None:
        thresholds = np.round(np.arange(0, 101) * 0.01, 2)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    tpr = np.array([(scores[pos] >= t).mean() for t in thresholds])
    fpr = np.array([(scores[neg] >= t).mean() for t in thresholds])
    return RocCurve(thresholds, fpr, tpr, _trapezoid_auc(fpr, tpr))
