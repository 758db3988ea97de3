"""Random design-problem corpus and text mutations shared by the tests."""
import numpy as np

from samyield.devices import DEVICE_KINDS
from samyield.distributions import Exponential, Fixed, Gaussian, Uniform
from samyield.problem import DesignProblem, Relation, Specification, StatisticalParameter

NAMES = ["w", "l", "t", "E", "g0", "width", "len_1", "_thk", "x1", "x2", "p9"]


def random_float(rng, lo=-1e6, hi=1e6):
    # spread across magnitudes so serialization of awkward floats is exercised
    mag = 10.0 ** rng.uniform(-12, 9)
    x = float(np.clip(rng.choice([-1, 1]) * mag * rng.uniform(0.1, 10), lo, hi))
    return x


def random_param(rng, name):
    nominal = random_float(rng)
    kind = rng.integers(4)
    scale = abs(nominal) * rng.uniform(1e-3, 0.5) + 1e-12
    if kind == 0:
        dist = Fixed(nominal)
    elif kind == 1:
        dist = Gaussian(nominal, scale)
    elif kind == 2:
        dist = Uniform(nominal - scale * rng.uniform(0.01, 1), nominal + scale * rng.uniform(0.01, 1))
    else:
        dist = Exponential(1.0 / scale, nominal - scale * rng.uniform(0, 2))
    return StatisticalParameter(name, nominal, dist)


def random_problem(rng) -> DesignProblem:
    device = str(rng.choice(list(DEVICE_KINDS)))
    kind = DEVICE_KINDS[device]
    n_params = int(rng.integers(0, 5))
    names = list(rng.choice(NAMES, size=n_params, replace=False))
    params = [random_param(rng, str(n)) for n in names]
    if device == "linear":
        fields = [f"x{k}" for k in rng.choice(np.arange(1, 12), size=rng.integers(1, 4), replace=False)]
        options = {f"c{f[1:]}": random_float(rng) for f in fields if rng.random() < 0.5}
        if rng.random() < 0.5:
            options["offset"] = random_float(rng)
    else:
        fields = list(kind.field_names())
        options = {"calib_f": abs(random_float(rng)) + 1.0} if device == "cantilever" else {}
    bindings = {}
    for f in fields:
        r = rng.random()
        if params and r < 0.6:
            bindings[f] = params[int(rng.integers(len(params)))].name
        elif r < 0.8:
            bindings[f] = random_float(rng)
    metrics = list(rng.permutation(kind.metrics)[: rng.integers(0, len(kind.metrics) + 1)])
    metrics = [str(m) for m in metrics]
    specs = []
    for _ in range(int(rng.integers(0, 4)) if metrics else 0):
        specs.append(
            Specification(
                str(rng.choice(metrics)), Relation(str(rng.choice(["ge", "le"]))), random_float(rng)
            )
        )
    return DesignProblem(device, params, bindings, metrics, specs, options)


ALPHABET = list("abcdefghijklmnopqrstuvwxyz_0123456789.eE+-= #\t\r\n") + ["µ", " ", "\x00", "\x1c", "1e999", "nan"]


def mutate(rng, text: str) -> str:
    lines = text.split("\n")
    op = rng.integers(8)
    i = int(rng.integers(len(lines)))
    line = lines[i]
    if op == 0 and line:
        k = int(rng.integers(len(line)))
        lines[i] = line[:k] + line[k + 1 :]
    elif op == 1:
        k = int(rng.integers(len(line) + 1))
        lines[i] = line[:k] + str(rng.choice(ALPHABET)) + line[k:]
    elif op == 2 and line:
        k = int(rng.integers(len(line)))
        lines[i] = line[:k] + str(rng.choice(ALPHABET)) + line[k + 1 :]
    elif op == 3:
        lines.insert(i, lines[int(rng.integers(len(lines)))])
    elif op == 4:
        j = int(rng.integers(len(lines)))
        lines[i], lines[j] = lines[j], lines[i]
    elif op == 5:
        lines[i] = line[: int(rng.integers(len(line) + 1))]
    elif op == 6:
        toks = line.split()
        if toks:
            toks[int(rng.integers(len(toks)))] = str(rng.choice(["gauss", "ge", "=", "-1", "0", "dist=none", "x", "sigma=-1"]))
            lines[i] = " ".join(toks)
    else:
        del lines[i]
    return "\n".join(lines)
