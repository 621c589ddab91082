"""Seeded instance generators; every kind returns a JSON-ready instance object."""

import random
from typing import Any, Dict

from kvisits.core import Deadlines, KVisitsInstance
from kvisits.densitylab import divergent_family, pinwheel_no_family, sample_low_density, worst_case_family
from kvisits.hardness import random_nmts
from kvisits.io import instance_to_json

KINDS = ("random", "low-density", "worstcase", "pinwheelno", "divergent", "hardchain")
SEEDED = ("random", "low-density", "hardchain")


def _sub_rng(seed: int, name: str) -> random.Random:
    # one named stream per generator so adding a kind never shifts another's output
    return random.Random(f"{seed}:{name}")


def generate(kind: str, params: Dict[str, Any], seed: int = 0) -> Dict[str, Any]:
    if kind == "random":
        n = int(params.get("n", 6))
        k = int(params.get("k", 2))
        rng = _sub_rng(seed, kind)
        return instance_to_json(KVisitsInstance(Deadlines(rng.randint(1, k * n) for _ in range(n)), k))
    if kind == "low-density":
        rng = _sub_rng(seed, kind)
        d = sample_low_density(rng, int(params.get("max_n", 40)), params.get("threshold", "sqrt2half"))
        return instance_to_json(KVisitsInstance(d, 2))
    if kind == "worstcase":
        return instance_to_json(KVisitsInstance(worst_case_family(int(params["j"]), int(params["dj"])), 2))
    if kind == "pinwheelno":
        inst, _ = pinwheel_no_family(int(params["x"]))
        return instance_to_json(inst)
    if kind == "divergent":
        inst, _ = divergent_family(int(params["k"]), int(params["n"]))
        return instance_to_json(inst)
    if kind == "hardchain":
        rng = _sub_rng(seed, kind)
        n = int(params.get("n", rng.randint(1, 4)))
        return instance_to_json(random_nmts(rng, n, int(params.get("max_value", 9))))
    raise ValueError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
