#!/usr/bin/env python3
"""Independent reference values for the C++ tests.

Every number here is computed from the closed-form definitions with plain
Python floats (or exact fractions where that is cheaper to trust), never by
calling into the library. Run it to regenerate frozen.json:

    python3 tests/oracles/derive.py > tests/oracles/frozen.json
"""
import json
import math
import random
import re
from fractions import Fraction

rng = random.Random(20240611)


def encircle(leader, wolf, a, r1, r2):
    out = []
    for xp, x, u1, u2 in zip(leader, wolf, r1, r2):
        c = 2.0 * u1
        big_a = 2.0 * a * u2 - a
        d = abs(c * xp - x)
        out.append(xp - big_a * d)
    return out


def encircle_cases():
    cases = [dict(leader=[1.0], wolf=[0.0], a=2.0, r1=[0.5], r2=[1.0])]
    for _ in range(40):
        dim = rng.randint(1, 6)
        case = dict(
            leader=[rng.uniform(-10, 10) for _ in range(dim)],
            wolf=[rng.uniform(-10, 10) for _ in range(dim)],
            a=rng.uniform(0, 2),
            r1=[rng.random() for _ in range(dim)],
            r2=[rng.random() for _ in range(dim)],
        )
        cases.append(case)
    for c in cases:
        c["expected"] = encircle(c["leader"], c["wolf"], c["a"], c["r1"], c["r2"])
    return cases


def combine_cases():
    cases = [dict(candidates=[[1.0], [2.0], [3.0]], lower=[-10.0], upper=[10.0])]
    for _ in range(30):
        dim = rng.randint(1, 5)
        lo = [rng.uniform(-5, 0) for _ in range(dim)]
        hi = [rng.uniform(0.1, 5) for _ in range(dim)]
        cand = [[rng.uniform(-8, 8) for _ in range(dim)] for _ in range(3)]
        cases.append(dict(candidates=cand, lower=lo, upper=hi))
    for c in cases:
        mean = [sum(col) / 3.0 for col in zip(*c["candidates"])]
        c["expected"] = [min(max(m, l), h) for m, l, h in zip(mean, c["lower"], c["upper"])]
    return cases


def weighted_cases():
    # sigma = 0: the update is the clipped convex combination of leader values.
    cases = [dict(leaders=[0.6, 0.4, 0.2], weights=[0.5, 0.3, 0.2], clip=[0.0, 1.0])]
    for _ in range(30):
        m = rng.randint(1, 6)
        raw = sorted((rng.uniform(0.05, 1.0) for _ in range(m)), reverse=True)
        raw = [r + (m - i) * 1e-3 for i, r in enumerate(raw)]  # strictly decreasing
        total = sum(raw)
        w = [r / total for r in raw]
        w[-1] = 1.0 - sum(w[:-1])
        if any(w[i] <= w[i + 1] for i in range(m - 1)):
            continue
        leaders = [rng.uniform(-2.5, 2.5) for _ in range(m)]
        cases.append(dict(leaders=leaders, weights=w, clip=[-2.0, 2.0]))
    for c in cases:
        s = sum(wi * li for wi, li in zip(c["weights"], c["leaders"]))
        c["expected"] = min(max(s, c["clip"][0]), c["clip"][1])
    return cases


def linear_weights():
    out = {}
    for m in range(1, 9):
        total = Fraction(m * (m + 1), 2)
        out[str(m)] = [float(Fraction(m - i) / total) for i in range(m)]
    return out


def judge_cases():
    cases = [dict(scores=[0.90, 0.70, 0.85], weights=[0.5, 0.2, 0.3])]
    for _ in range(20):
        cases.append(dict(scores=[rng.randint(0, 100) / 100 for _ in range(3)], weights=[0.5, 0.2, 0.3]))
    for c in cases:
        c["expected"] = sum(s * w for s, w in zip(c["scores"], c["weights"]))
    return cases


def landscape_cases():
    out = []
    for t in [0.0, 0.2, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0]:
        out.append(dict(temperature=t, expected=math.exp(-(((t - 0.6) / 0.2) ** 2))))
    return out


NUMBER = re.compile(r"-?\d{1,3}(?:,\d{3})+(?:\.\d+)?|-?\d+(?:\.\d+)?|-?\.\d+")


def canonical(tok):
    tok = tok.replace(",", "")
    value = Fraction(tok)
    if value == 0:
        return "0"
    if value.denominator == 1:
        return str(value.numerator)
    text = tok.lstrip("-").lstrip("0") or "0"
    if text.startswith("."):
        text = "0" + text
    text = text.rstrip("0").rstrip(".")
    return ("-" if value < 0 else "") + text


def extraction_cases():
    texts = [
        "The answer is 3 + 7 = 10",
        "Therefore, Tiffany has a total of 10 bags of cans altogether.",
        "She paid $1,250.50 in total.",
        "Start with 3, add 7, total 10.0",
        "It drops to -4 degrees.",
        "We get 0.50 of the pie",
        "Step 1: 12 apples. Step 2: 12 * 3 = 36. The answer is 36.",
        "No digits here",
        "Total: 1,000,000 people",
        "1. Read. 2. Compute 4 - 9 = -5",
    ]
    out = []
    for t in texts:
        found = NUMBER.findall(t)
        out.append(dict(text=t, expected=canonical(found[-1]) if found else None))
    return out


def split_sizes():
    return {str(n): max(1, int(Fraction(n, 5) + Fraction(1, 2))) for n in range(5, 201)}


def problems():
    pts = [[0.0] * 5, [1.0] * 5, [0.5, -0.5, 1.5, -1.5, 2.0], [-3.0, 2.0, 0.25, 4.0, -1.0]]
    out = []
    for p in pts:
        sphere = sum(v * v for v in p)
        rastrigin = 10 * len(p) + sum(v * v - 10 * math.cos(2 * math.pi * v) for v in p)
        rosen = sum(100 * (p[i + 1] - p[i] ** 2) ** 2 + (p[i] - 1) ** 2 for i in range(len(p) - 1))
        out.append(dict(x=p, sphere=sphere, rastrigin=rastrigin, rosenbrock=rosen))
    return out


def main():
    frozen = dict(
        encircle=encircle_cases(),
        combine=combine_cases(),
        weighted=weighted_cases(),
        linear_weights=linear_weights(),
        judge=judge_cases(),
        landscape=landscape_cases(),
        extraction=extraction_cases(),
        split_sizes=split_sizes(),
        problems=problems(),
    )
    print(json.dumps(frozen, indent=1))


if __name__ == "__main__":
    main()
