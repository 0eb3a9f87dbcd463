"""Regenerates the bundled fixture: a small MLP with batch norm and its data.

Writes tiny_mlp.json, tiny_test.csv and tiny_manifest.json next to this file.
The recorded accuracy is computed in float64 from the exported numbers, so the
C++ reference inference must reproduce it exactly.
"""
import json
import pathlib

import numpy as np
import torch

SEED = 20260419
N_FEATURES = 10
N_CLASSES = 4
N_TRAIN = 2000
N_TEST = 1200
OUT = pathlib.Path(__file__).resolve().parent


def make_data(rng, n, centers):
    labels = rng.integers(0, N_CLASSES, size=n)
    x = centers[labels] + rng.normal(0.0, 0.22, size=(n, N_FEATURES))
    return np.clip(x, 0.0, 1.0), labels


def main():
    rng = np.random.default_rng(SEED)
    torch.manual_seed(SEED)
    centers = rng.uniform(0.2, 0.8, size=(N_CLASSES, N_FEATURES))
    x_train, y_train = make_data(rng, N_TRAIN, centers)
    x_test, y_test = make_data(rng, N_TEST, centers)
    x_test = np.round(x_test, 6)

    model = torch.nn.Sequential(
        torch.nn.Linear(N_FEATURES, 16), torch.nn.BatchNorm1d(16), torch.nn.ReLU(),
        torch.nn.Linear(16, 8), torch.nn.BatchNorm1d(8), torch.nn.ReLU(),
        torch.nn.Linear(8, N_CLASSES))
    opt = torch.optim.Adam(model.parameters(), lr=0.01)
    xt = torch.tensor(x_train, dtype=torch.float32)
    yt = torch.tensor(y_train)
    for _ in range(300):
        opt.zero_grad()
        loss = torch.nn.functional.cross_entropy(model(xt), yt)
        loss.backward()
        opt.step()
    model.eval()

    def dense(lin, activation):
        w = lin.weight.detach().double().numpy()
        b = lin.bias.detach().double().numpy()
        return {"kind": "dense", "widths": [w.shape[1], w.shape[0]],
                "activation": activation, "weights": w.tolist(), "bias": b.tolist()}

    def batchnorm(bn, activation):
        var = (bn.running_var.detach().double() + bn.eps).numpy()
        n = var.shape[0]
        return {"kind": "batchnorm", "widths": [n, n], "activation": activation,
                "bn": {"gamma": bn.weight.detach().double().numpy().tolist(),
                       "beta": bn.bias.detach().double().numpy().tolist(),
                       "mean": bn.running_mean.detach().double().numpy().tolist(),
                       "var": var.tolist()}}

    out = dense(model[6], "identity")
    out["kind"] = "softmax"
    doc = {"name": "tiny_mlp", "version": "1", "input_width": N_FEATURES,
           "layers": [dense(model[0], "identity"), batchnorm(model[1], "relu"),
                      dense(model[3], "identity"), batchnorm(model[4], "relu"), out]}
    (OUT / "tiny_mlp.json").write_text(json.dumps(doc, indent=1) + "\n")

    with open(OUT / "tiny_test.csv", "w") as f:
        for label, row in zip(y_test, x_test):
            f.write(",".join([str(int(label))] + [f"{v:.6f}" for v in row]) + "\n")

    # Reload what was written and evaluate in float64.
    doc = json.loads((OUT / "tiny_mlp.json").read_text())
    data = np.loadtxt(OUT / "tiny_test.csv", delimiter=",")
    h = data[:, 1:]
    for layer in doc["layers"]:
        if layer["kind"] == "batchnorm":
            bn = layer["bn"]
            h = (np.array(bn["gamma"]) * (h - np.array(bn["mean"]))
                 / np.sqrt(np.array(bn["var"])) + np.array(bn["beta"]))
        else:
            h = h @ np.array(layer["weights"]).T + np.array(layer["bias"])
        if layer["activation"] == "relu":
            h = np.maximum(h, 0.0)
    accuracy = float(np.mean(np.argmax(h, axis=1) == data[:, 0]))
    manifest = {"model": "tiny_mlp.json", "data": "tiny_test.csv", "seed": SEED,
                "framework": f"torch {torch.__version__}", "samples": N_TEST,
                "reference_accuracy": accuracy}
    (OUT / "tiny_manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(manifest)


if __name__ == "__main__":
    main()
