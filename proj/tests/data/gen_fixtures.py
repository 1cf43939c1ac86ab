"""Regenerates the reference fixtures used by the unit tests.

encoder_small.json  weight file plus the expected latent for a fixed window,
                    evaluated with plain numpy.
ttest_cases.json    paired t statistics and two-sided p-values from scipy.
"""
import json
import pathlib

import numpy as np
from scipy import stats

HERE = pathlib.Path(__file__).parent


def window():
    r, c = np.meshgrid(np.arange(64), np.arange(64), indexing="ij")
    return (((r * 37 + c * 11) % 64) / 63.0).reshape(1, 64, 64)


def conv2d(x, w, b, stride, pad):
    x = np.pad(x, ((0, 0), (pad, pad), (pad, pad)))
    oc, ic, kh, kw = w.shape
    oh = (x.shape[1] - kh) // stride + 1
    ow = (x.shape[2] - kw) // stride + 1
    out = np.zeros((oc, oh, ow))
    for o in range(oc):
        for y in range(oh):
            for xx in range(ow):
                patch = x[:, y * stride:y * stride + kh, xx * stride:xx * stride + kw]
                out[o, y, xx] = np.sum(patch * w[o]) + b[o]
    return out


def pool(x, k, fn):
    c, h, w = x.shape
    return fn(x[:, :h // k * k, :w // k * k].reshape(c, h // k, k, w // k, k), axis=(2, 4))


def encoder_fixture():
    rng = np.random.default_rng(20240611)
    w1 = rng.normal(0, 0.3, (4, 1, 5, 5)); b1 = rng.normal(0, 0.1, 4)
    w2 = rng.normal(0, 0.2, (8, 4, 3, 3)); b2 = rng.normal(0, 0.1, 8)
    gamma = rng.uniform(0.5, 1.5, 8); beta = rng.normal(0, 0.1, 8)
    mean = rng.normal(0, 0.2, 8); var = rng.uniform(0.5, 2.0, 8)
    w3 = rng.normal(0, 0.1, (32, 128)); b3 = rng.normal(0, 0.1, 32)
    eps = 1e-3

    x = window()
    x = np.maximum(conv2d(x, w1, b1, 2, 2), 0)
    x = pool(x, 2, np.max)
    x = conv2d(x, w2, b2, 2, 1)
    x = (x - mean[:, None, None]) / np.sqrt(var[:, None, None] + eps) * gamma[:, None, None] + beta[:, None, None]
    x = np.maximum(x, 0)
    x = pool(x, 2, np.mean)
    z = w3 @ x.reshape(-1) + b3

    doc = {
        "format": "clutterpush-encoder",
        "version": 1,
        "kind": "weight_file",
        "input_shape": [1, 64, 64],
        "output_dim": 32,
        "layers": [
            {"type": "conv2d", "shape": [4, 1, 5, 5], "stride": [2, 2], "padding": [2, 2],
             "weights": w1.ravel().tolist(), "bias": b1.tolist(), "activation": "relu"},
            {"type": "maxpool", "kernel": [2, 2], "stride": [2, 2]},
            {"type": "conv2d", "shape": [8, 4, 3, 3], "stride": [2, 2], "padding": [1, 1],
             "weights": w2.ravel().tolist(), "bias": b2.tolist()},
            {"type": "batchnorm", "gamma": gamma.tolist(), "beta": beta.tolist(), "mean": mean.tolist(),
             "var": var.tolist(), "eps": eps, "activation": "relu"},
            {"type": "avgpool", "kernel": [2, 2], "stride": [2, 2]},
            {"type": "flatten"},
            {"type": "dense", "shape": [32, 128], "weights": w3.ravel().tolist(), "bias": b3.tolist()},
        ],
        "expected_latent": z.tolist(),
    }
    (HERE / "encoder_small.json").write_text(json.dumps(doc, indent=1) + "\n")


def ttest_fixture():
    rng = np.random.default_rng(7)
    cases = []
    for n, shift, sd in [(10, 0.0, 1.0), (25, 0.3, 1.0), (50, -0.2, 0.5), (100, 0.05, 2.0), (500, 0.1, 1.0)]:
        a = rng.normal(0, 1, n)
        b = a - shift + rng.normal(0, sd, n)
        res = stats.ttest_rel(a, b)
        cases.append({"a": a.tolist(), "b": b.tolist(), "t": float(res.statistic), "p": float(res.pvalue)})
    (HERE / "ttest_cases.json").write_text(json.dumps({"cases": cases}) + "\n")


if __name__ == "__main__":
    encoder_fixture()
    ttest_fixture()
