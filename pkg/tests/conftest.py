import numpy as np
import pytest

from centricae._backend import available_backends
from centricae.geometry import Dataset


def pairwise_auroc(scores, labels):
    """O(N^2) oracle: fraction of (anomaly, normal) pairs ranked correctly, ties half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    pos, neg = s[y == 1], s[y == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            wins += 1.0 if p > n else 0.5 if p == n else 0.0
    return wins / (pos.size * neg.size)


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


@pytest.fixture
def toy_data():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((400, 4))
    y = np.zeros(400, dtype=np.int8)
    y[:40] = 1
    x[:40, 0] *= 3.0
    x[:40, 1] *= 0.3
    return Dataset(x, y)


def trapezoid_area(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def gradient_check(net, batch, center, k=1.0, h=1e-6):
    """Relative error between backprop and central finite differences of the radial loss."""
    from centricae.autoencoder import radial_loss

    _, grads = radial_loss(net, batch, center, k)
    analytic, numeric = [], []
    for p, g in zip(net.parameters(), grads):
        flat = p.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up, _ = radial_loss(net, batch, center, k)
            flat[i] = old - h
            down, _ = radial_loss(net, batch, center, k)
            flat[i] = old
            numeric.append((up - down) / (2 * h))
        analytic.append(g.reshape(-1))
    a, n = np.concatenate(analytic), np.array(numeric)
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-300))


def random_small_net(rng, use_bias=True, hidden="leaky_relu"):
    from centricae.autoencoder import NetworkSpec, init_network

    dim = int(rng.integers(2, 6))
    sizes = (dim, int(rng.integers(2, 8)), int(rng.integers(1, 4)), int(rng.integers(2, 8)), dim)
    net = init_network(NetworkSpec(sizes, hidden_activation=hidden, use_bias=use_bias), int(rng.integers(2**31)))
    if use_bias:
        for b in net.biases:
            b += 0.1 * rng.standard_normal(b.shape)
    return net


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
