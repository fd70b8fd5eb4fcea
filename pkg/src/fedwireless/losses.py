"""Built-in classification loss models operating on a flat parameter vector.

Both models expose the same surface: ``dim`` (flattened parameter count),
``loss``/``grad`` on a batch, ``predict``, and ``init_params``.  Gradients
are analytic and are verified against central finite differences in the
test suite.
"""

from __future__ import annotations

import numpy as np


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


class SoftmaxRegression:
    """Multinomial logistic regression with cross-entropy loss.

    Parameters pack as [W (classes x features), b (classes)].
    """

    def __init__(self, n_features: int, n_classes: int):
        if n_features < 1 or n_classes < 2:
            raise ValueError("need n_features >= 1 and n_classes >= 2")
        self.n_features = n_features
        self.n_classes = n_classes

    @property
    def dim(self) -> int:
        return self.n_classes * (self.n_features + 1)

    def _unpack(self, theta: np.ndarray):
        c, f = self.n_classes, self.n_features
        W = theta[: c * f].reshape(c, f)
        b = theta[c * f :]
        return W, b

    def _logits(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        W, b = self._unpack(theta)
        return X @ W.T + b

    def loss(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
        logp = _log_softmax(self._logits(theta, X))
        return float(-logp[np.arange(X.shape[0]), y].mean())

    def grad(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        B = X.shape[0]
        p = np.exp(_log_softmax(self._logits(theta, X)))
        p[np.arange(B), y] -= 1.0
        p /= B
        gW = p.T @ X
        gb = p.sum(axis=0)
        return np.concatenate([gW.ravel(), gb])

    def predict(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        return self._logits(theta, X).argmax(axis=1)

    def init_params(self, rng: np.random.Generator | None = None) -> np.ndarray:
        # Cross-entropy over a linear model is convex; zero start is standard.
        return np.zeros(self.dim)


class TanhMLP:
    """One-hidden-layer perceptron with tanh units and a softmax output.

    Parameters pack as [W1 (hidden x features), b1, W2 (classes x hidden),
    b2].  tanh keeps the loss smooth, which the finite-difference gradient
    checks rely on.
    """

    def __init__(self, n_features: int, n_hidden: int, n_classes: int):
        if n_features < 1 or n_hidden < 1 or n_classes < 2:
            raise ValueError("need n_features, n_hidden >= 1 and n_classes >= 2")
        self.n_features = n_features
        self.n_hidden = n_hidden
        self.n_classes = n_classes

    @property
    def dim(self) -> int:
        f, h, c = self.n_features, self.n_hidden, self.n_classes
        return h * f + h + c * h + c

    def _unpack(self, theta: np.ndarray):
        f, h, c = self.n_features, self.n_hidden, self.n_classes
        o = 0
        W1 = theta[o : o + h * f].reshape(h, f)
        o += h * f
        b1 = theta[o : o + h]
        o += h
        W2 = theta[o : o + c * h].reshape(c, h)
        o += c * h
        b2 = theta[o : o + c]
        return W1, b1, W2, b2

    def _forward(self, theta: np.ndarray, X: np.ndarray):
        W1, b1, W2, b2 = self._unpack(theta)
        hidden = np.tanh(X @ W1.T + b1)
        logits = hidden @ W2.T + b2
        return hidden, logits

    def loss(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
        _, logits = self._forward(theta, X)
        logp = _log_softmax(logits)
        return float(-logp[np.arange(X.shape[0]), y].mean())

    def grad(self, theta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        W1, b1, W2, b2 = self._unpack(theta)
        B = X.shape[0]
        hidden, logits = self._forward(theta, X)
        dlogits = np.exp(_log_softmax(logits))
        dlogits[np.arange(B), y] -= 1.0
        dlogits /= B
        gW2 = dlogits.T @ hidden
        gb2 = dlogits.sum(axis=0)
        dhidden = (dlogits @ W2) * (1.0 - hidden**2)
        gW1 = dhidden.T @ X
        gb1 = dhidden.sum(axis=0)
        return np.concatenate([gW1.ravel(), gb1, gW2.ravel(), gb2])

    def predict(self, theta: np.ndarray, X: np.ndarray) -> np.ndarray:
        _, logits = self._forward(theta, X)
        return logits.argmax(axis=1)

    def init_params(self, rng: np.random.Generator | None = None) -> np.ndarray:
        if rng is None:
            rng = np.random.default_rng(0)
        f, h, c = self.n_features, self.n_hidden, self.n_classes
        W1 = rng.standard_normal((h, f)) / np.sqrt(f)
        W2 = rng.standard_normal((c, h)) / np.sqrt(h)
        return np.concatenate([W1.ravel(), np.zeros(h), W2.ravel(), np.zeros(c)])
