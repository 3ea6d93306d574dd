"""Differentiable objectives with exact, hand-derived gradients.

Three model kinds share one interface over flat float64 parameter vectors:

* ``SoftmaxLinear`` -- multinomial logistic regression,
* ``TanhMLP``       -- one tanh hidden layer followed by a softmax head,
* ``Quadratic``     -- a diagonal strongly-convex bowl that ignores its batch,
                       useful as a convex test objective.

Flattening convention: parameters are packed layer by layer, each weight
matrix in row-major (C-contiguous) order, followed by that layer's bias.
"""

import numpy as np

from .errors import ConfigError, NumericError

__all__ = ["SoftmaxLinear", "TanhMLP", "Quadratic", "check_finite"]


def check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {what}")
    return arr


def _softmax_ce(logits, labels):
    """Mean cross-entropy and d(loss)/d(logits) for integer labels.

    Uses the log-sum-exp shift for stability. Returns (loss, dlogits) where
    dlogits already carries the 1/m batch factor.
    """
    m = logits.shape[0]
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    total = exp.sum(axis=1, keepdims=True)
    log_prob = shifted - np.log(total)
    loss = -log_prob[np.arange(m), labels].mean()
    dlogits = exp / total
    dlogits[np.arange(m), labels] -= 1.0
    dlogits /= m
    return loss, dlogits


class _ModelBase:
    """Shared plumbing: dimension checks, proximal penalty, derived helpers."""

    dim = 0

    def _check_params(self, params):
        params = np.asarray(params, dtype=np.float64)
        if params.ndim != 1 or params.shape[0] != self.dim:
            raise ConfigError(
                f"parameter vector has length {params.shape}, expected ({self.dim},)"
            )
        return params

    @staticmethod
    def _check_batch(features, labels):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        if features.ndim != 2 or features.shape[0] == 0:
            raise ConfigError("batch must be a nonempty (m, n) feature matrix")
        if labels.shape[0] != features.shape[0]:
            raise ConfigError("feature/label count mismatch")
        return features, labels

    def loss(self, params, features, labels):
        return self.loss_grad(params, features, labels)[0]

    def grad(self, params, features, labels):
        return self.loss_grad(params, features, labels)[1]

    def loss_grad(self, params, features, labels):
        params = self._check_params(params)
        features, labels = self._check_batch(features, labels)
        loss, grad = self._loss_grad(params, features, labels)
        if not np.isfinite(loss):
            raise NumericError("non-finite loss")
        check_finite(grad, "gradient")
        return loss, grad

    def prox_loss_grad(self, params, features, labels, anchor, weight):
        """Loss and gradient with a squared-L2 pull toward ``anchor``.

        Adds (weight/2) * ||params - anchor||^2 to the loss and
        weight * (params - anchor) to the gradient. Keeps local updates from
        drifting far from the last broadcast aggregate on skewed data.
        """
        if weight < 0:
            raise ConfigError("proximal weight must be nonnegative")
        params = self._check_params(params)
        anchor = np.asarray(anchor, dtype=np.float64)
        if anchor.shape != params.shape:
            raise ConfigError("anchor length does not match parameter length")
        loss, grad = self.loss_grad(params, features, labels)
        if weight == 0.0:
            return loss, grad
        diff = params - anchor
        return loss + 0.5 * weight * float(diff @ diff), grad + weight * diff

    def predict(self, params, features):
        raise ConfigError(f"{type(self).__name__} is not a classifier")

    def accuracy(self, params, features, labels):
        """Fraction of argmax-correct predictions; ties go to the lowest class."""
        features, labels = self._check_batch(features, labels)
        pred = self.predict(params, features)
        return float(np.mean(pred == labels))


class SoftmaxLinear(_ModelBase):
    """Linear classifier with a softmax head and cross-entropy loss.

    Parameters pack as [weights (classes x features, row-major), biases].
    """

    def __init__(self, features, classes):
        if classes < 2 or features < 1:
            raise ConfigError("SoftmaxLinear needs >= 2 classes and >= 1 feature")
        self.n_features = features
        self.n_classes = classes
        self.dim = classes * (features + 1)

    def _unpack(self, params):
        k = self.n_classes * self.n_features
        weights = params[:k].reshape(self.n_classes, self.n_features)
        bias = params[k:]
        return weights, bias

    def _logits(self, params, features):
        weights, bias = self._unpack(params)
        return features @ weights.T + bias

    def _loss_grad(self, params, features, labels):
        logits = self._logits(params, features)
        loss, dlogits = _softmax_ce(logits, labels)
        d_weights = dlogits.T @ features
        d_bias = dlogits.sum(axis=0)
        return loss, np.concatenate([d_weights.ravel(), d_bias])

    def predict(self, params, features):
        params = self._check_params(params)
        return np.argmax(self._logits(params, features), axis=1)

    def init_params(self, rng, scale=None):
        if scale is None:
            scale = 1.0 / np.sqrt(self.n_features)
        weights = rng.normal(0.0, scale, (self.n_classes, self.n_features))
        bias = np.zeros(self.n_classes)
        return np.concatenate([weights.ravel(), bias])


class TanhMLP(_ModelBase):
    """One tanh hidden layer, then a softmax output layer.

    Parameters pack as [W1 (hidden x features), b1, W2 (classes x hidden), b2],
    each matrix row-major.
    """

    def __init__(self, features, hidden, classes):
        if classes < 2 or features < 1 or hidden < 1:
            raise ConfigError("TanhMLP needs >= 2 classes, >= 1 feature, >= 1 hidden unit")
        self.n_features = features
        self.n_hidden = hidden
        self.n_classes = classes
        self.dim = hidden * (features + 1) + classes * (hidden + 1)

    def _unpack(self, params):
        n, h, c = self.n_features, self.n_hidden, self.n_classes
        off = 0
        w1 = params[off:off + h * n].reshape(h, n); off += h * n
        b1 = params[off:off + h]; off += h
        w2 = params[off:off + c * h].reshape(c, h); off += c * h
        b2 = params[off:]
        return w1, b1, w2, b2

    def _forward(self, params, features):
        w1, b1, w2, b2 = self._unpack(params)
        hidden = np.tanh(features @ w1.T + b1)
        logits = hidden @ w2.T + b2
        return hidden, logits

    def _loss_grad(self, params, features, labels):
        w1, b1, w2, b2 = self._unpack(params)
        hidden = np.tanh(features @ w1.T + b1)
        logits = hidden @ w2.T + b2
        loss, dlogits = _softmax_ce(logits, labels)
        d_w2 = dlogits.T @ hidden
        d_b2 = dlogits.sum(axis=0)
        d_hidden = (dlogits @ w2) * (1.0 - hidden * hidden)
        d_w1 = d_hidden.T @ features
        d_b1 = d_hidden.sum(axis=0)
        grad = np.concatenate([d_w1.ravel(), d_b1, d_w2.ravel(), d_b2])
        return loss, grad

    def predict(self, params, features):
        params = self._check_params(params)
        return np.argmax(self._forward(params, features)[1], axis=1)

    def init_params(self, rng, scale=None):
        w1 = rng.normal(0.0, 1.0 / np.sqrt(self.n_features), (self.n_hidden, self.n_features))
        b1 = np.zeros(self.n_hidden)
        w2 = rng.normal(0.0, 1.0 / np.sqrt(self.n_hidden), (self.n_classes, self.n_hidden))
        b2 = np.zeros(self.n_classes)
        return np.concatenate([w1.ravel(), b1, w2.ravel(), b2])


class Quadratic(_ModelBase):
    """Diagonal quadratic bowl 0.5 * sum_j c_j (w_j - t_j)^2.

    The batch is accepted for interface compatibility and ignored; curvatures
    must be strictly positive so the objective is strongly convex.
    """

    def __init__(self, target, curvature):
        self.target = np.asarray(target, dtype=np.float64)
        self.curvature = np.asarray(curvature, dtype=np.float64)
        if self.target.ndim != 1 or self.target.shape != self.curvature.shape:
            raise ConfigError("target and curvature must be 1-d and the same length")
        if np.any(self.curvature <= 0):
            raise ConfigError("curvature entries must be strictly positive")
        self.dim = self.target.shape[0]

    def _loss_grad(self, params, features, labels):
        diff = params - self.target
        scaled = self.curvature * diff
        return 0.5 * float(diff @ scaled), scaled

    def loss_grad(self, params, features=None, labels=None):
        # batch is irrelevant here, so permit calls without one
        params = self._check_params(params)
        loss, grad = self._loss_grad(params, None, None)
        if not np.isfinite(loss):
            raise NumericError("non-finite loss")
        check_finite(grad, "gradient")
        return loss, grad

    def loss(self, params, features=None, labels=None):
        return self.loss_grad(params)[0]

    def grad(self, params, features=None, labels=None):
        return self.loss_grad(params)[1]

    def init_params(self, rng, scale=1.0):
        return self.target + rng.normal(0.0, scale, self.dim)
