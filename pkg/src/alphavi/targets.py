"""Target log-joints: diagonal Gaussian and Bayesian logistic regression.

Both targets accept a single point ``z`` of shape ``(d,)`` or a batch of
shape ``(K, d)`` and return one log-joint per point.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

LOG_2PI = math.log(2.0 * math.pi)


class DatasetError(ValueError):
    """Malformed or unsupported dataset file."""


def _check_dim(z, d):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] != d:
        raise ValueError(f"expected last dimension {d}, got shape {z.shape}")
    return z


def gaussian_schedule(d: int) -> np.ndarray:
    """Variances ``0.2 + 9.8 * i / d`` for ``i = 1..d``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    i = np.arange(1, d + 1)
    return 0.2 + 9.8 * i / d


@dataclass(frozen=True)
class GaussianTarget:
    """Zero-mean diagonal Gaussian with the given variances."""

    variances: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.variances, dtype=float)
        if v.ndim != 1 or np.any(v <= 0):
            raise ValueError("variances must be a positive vector")
        object.__setattr__(self, "variances", v)

    @classmethod
    def from_schedule(cls, d: int) -> "GaussianTarget":
        return cls(gaussian_schedule(d))

    @property
    def dim(self) -> int:
        return self.variances.size

    def log_joint(self, z):
        z = _check_dim(z, self.dim)
        v = self.variances
        return -0.5 * np.sum(LOG_2PI + np.log(v)) - 0.5 * np.sum(z * z / v, axis=-1)

    def grad_log_joint(self, z):
        z = _check_dim(z, self.dim)
        return -z / self.variances


@dataclass(frozen=True)
class LogisticRegression:
    """Bayesian logistic regression with an isotropic Gaussian prior.

    ``design`` already carries the intercept column; labels are 0/1.
    """

    design: np.ndarray
    labels: np.ndarray
    prior_variance: float = 1.0

    def __post_init__(self):
        X = np.asarray(self.design, dtype=float)
        y = np.asarray(self.labels, dtype=float)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ValueError("design must be N x d and labels length N")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("labels must be 0/1")
        if self.prior_variance <= 0:
            raise ValueError("prior_variance must be positive")
        object.__setattr__(self, "design", X)
        object.__setattr__(self, "labels", y)

    @property
    def dim(self) -> int:
        return self.design.shape[1]

    def log_joint(self, z):
        z = _check_dim(z, self.dim)
        a = z @ self.design.T
        # y*log(sig(a)) + (1-y)*log(sig(-a)) = y*a - softplus(a)
        loglik = np.sum(self.labels * a - np.logaddexp(0.0, a), axis=-1)
        s2 = self.prior_variance
        logprior = -0.5 * self.dim * (LOG_2PI + math.log(s2)) - 0.5 * np.sum(z * z, axis=-1) / s2
        return loglik + logprior

    def grad_log_joint(self, z):
        z = _check_dim(z, self.dim)
        resid = self.labels - expit(z @ self.design.T)
        return resid @ self.design - z / self.prior_variance


_TOKEN = re.compile(r"^(\d+):(\S+)$")


def parse_libsvm(text: str):
    """Parse sparse ``label idx:val ...`` text into ``(rows, labels, max_index)``.

    ``rows`` is a list of ``{index: value}`` dicts with 1-based indices.
    """
    rows, labels, max_index = [], [], 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *tokens = line.split()
        try:
            label = float(head)
        except ValueError:
            raise DatasetError(f"line {lineno}: bad label {head!r}") from None
        if label == 1.0:
            labels.append(1)
        elif label in (-1.0, 0.0):
            labels.append(0)
        else:
            raise DatasetError(f"line {lineno}: non-binary label {head!r}")
        row, last = {}, 0
        for tok in tokens:
            m = _TOKEN.match(tok)
            if m is None:
                raise DatasetError(f"line {lineno}: malformed feature {tok!r}")
            idx = int(m.group(1))
            try:
                val = float(m.group(2))
            except ValueError:
                raise DatasetError(f"line {lineno}: bad value in {tok!r}") from None
            if idx <= last:
                raise DatasetError(f"line {lineno}: indices must be 1-based and increasing")
            row[idx] = val
            last = idx
        max_index = max(max_index, last)
        rows.append(row)
    if not rows:
        raise DatasetError("no data lines")
    return rows, np.array(labels, dtype=float), max_index


def load_libsvm(path, max_index=None):
    """Load a sparse-format file as a dense design with a trailing intercept column.

    Returns ``(design, labels, d)`` where ``d = max_index + 1``.
    """
    with open(path) as fh:
        rows, labels, seen = parse_libsvm(fh.read())
    width = seen if max_index is None else max_index
    X = np.zeros((len(rows), width + 1))
    for r, row in enumerate(rows):
        for idx, val in row.items():
            X[r, idx - 1] = val
    X[:, -1] = 1.0
    return X, labels, width + 1


def write_libsvm(path, design, labels):
    """Write a design (intercept column last, dropped) back to sparse format."""
    X = np.asarray(design)[:, :-1]
    with open(path, "w") as fh:
        for x, y in zip(X, labels):
            feats = " ".join(f"{j + 1}:{v!r}" for j, v in enumerate(x.tolist()) if v != 0)
            fh.write(f"{'+1' if y == 1 else '-1'} {feats}".rstrip() + "\n")


def load_logistic_target(path, prior_variance=1.0) -> LogisticRegression:
    X, y, _ = load_libsvm(path)
    return LogisticRegression(X, y, prior_variance)
