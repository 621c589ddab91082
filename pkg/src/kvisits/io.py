"""JSON instance and schedule files.

Instance objects carry a ``variant`` key:

* ``kvisits``: ``{"k": int, "deadlines": [int]}``; ``2v`` is the same with ``k = 2``
* ``one_or_two``: ``{"single": [int], "double": [int]}``
* ``pm``: ``{"deadlines": [int], "targets": [int]}``
* ``nmts``: ``{"a": [int], "b": [int], "t": [int]}``
* ``srnmts`` / ``in3dm``: ``{"a": [int], "t": [int]}``

Schedules are ``{"entries": [{"pos": int, "task": int, "role": str}]}``.
"""

import json
from pathlib import Path
from typing import Any, Dict

from kvisits.core import ROLES, Entry, InstanceError, KVisitsInstance, OneOrTwoInstance, Schedule
from kvisits.hardness import TRIVIAL_NO, IN3DMInstance, NMTSInstance, SRNMTSInstance
from kvisits.posmatch import PMInstance

VARIANTS = ("kvisits", "2v", "one_or_two", "pm", "nmts", "srnmts", "in3dm")


class InputError(ValueError):
    """Malformed input file; the message names the offending location."""


def read_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _int_list(obj, key, where):
    if key not in obj:
        raise InputError(f"{where}: missing key {key!r}")
    val = obj[key]
    if not isinstance(val, list):
        raise InputError(f"{where}.{key}: expected a list of integers")
    for i, x in enumerate(val):
        if isinstance(x, bool) or not isinstance(x, int):
            raise InputError(f"{where}.{key}[{i}]: expected an integer, got {x!r}")
    return val


def parse_instance(obj: Dict[str, Any], where: str = "$"):
    """Typed instance from a decoded JSON object."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected a JSON object")
    variant = obj.get("variant")
    if variant not in VARIANTS:
        raise InputError(f"{where}.variant: expected one of {', '.join(VARIANTS)}, got {variant!r}")
    try:
        if variant in ("kvisits", "2v"):
            k = obj.get("k", 2)
            if variant == "2v" and k != 2:
                raise InputError(f"{where}.k: variant 2v implies k = 2")
            if isinstance(k, bool) or not isinstance(k, int):
                raise InputError(f"{where}.k: expected an integer")
            return KVisitsInstance(_int_list(obj, "deadlines", where), k)
        if variant == "one_or_two":
            return OneOrTwoInstance(_int_list(obj, "single", where), _int_list(obj, "double", where))
        if variant == "pm":
            return PMInstance(_int_list(obj, "deadlines", where), _int_list(obj, "targets", where))
        if variant == "nmts":
            return NMTSInstance(_int_list(obj, "a", where), _int_list(obj, "b", where), _int_list(obj, "t", where))
        cls = SRNMTSInstance if variant == "srnmts" else IN3DMInstance
        return cls(_int_list(obj, "a", where), _int_list(obj, "t", where))
    except InstanceError as exc:
        raise InputError(f"{where}: {exc}") from exc


def load_instance(path):
    return parse_instance(read_json(path), str(path))


def instance_to_json(inst) -> Dict[str, Any]:
    if inst is TRIVIAL_NO:
        return {"variant": "trivial_no"}
    if isinstance(inst, KVisitsInstance):
        return {"variant": "kvisits", "k": inst.k, "deadlines": list(inst.deadlines)}
    if isinstance(inst, OneOrTwoInstance):
        return {"variant": "one_or_two", "single": list(inst.single_deadlines), "double": list(inst.double_deadlines)}
    if isinstance(inst, PMInstance):
        return {"variant": "pm", "deadlines": list(inst.deadlines), "targets": list(inst.targets)}
    if isinstance(inst, NMTSInstance):
        return {"variant": "nmts", "a": list(inst.a_set), "b": list(inst.b_set), "t": list(inst.t_set)}
    if isinstance(inst, SRNMTSInstance):
        return {"variant": "srnmts", "a": list(inst.a_set), "t": list(inst.t_set)}
    if isinstance(inst, IN3DMInstance):
        return {"variant": "in3dm", "a": list(inst.a_set), "t": list(inst.t_set)}
    raise TypeError(f"cannot serialize {type(inst).__name__}")


def schedule_to_json(sched: Schedule) -> Dict[str, Any]:
    return {"entries": [{"pos": e.pos, "task": e.task, "role": e.role} for e in sched.entries]}


def parse_schedule(obj, where: str = "$") -> Schedule:
    if isinstance(obj, list):  # bare task list, roles plain
        obj = {"entries": [{"pos": i + 1, "task": t, "role": "plain"} for i, t in enumerate(obj)]}
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise InputError(f"{where}: expected {{\"entries\": [...]}}")
    ents = []
    for i, e in enumerate(obj["entries"]):
        loc = f"{where}.entries[{i}]"
        if not isinstance(e, dict):
            raise InputError(f"{loc}: expected an object")
        for key in ("pos", "task"):
            if isinstance(e.get(key), bool) or not isinstance(e.get(key), int):
                raise InputError(f"{loc}.{key}: expected an integer")
        role = e.get("role", "plain")
        if role not in ROLES:
            raise InputError(f"{loc}.role: expected one of {', '.join(ROLES)}")
        ents.append(Entry(e["pos"], e["task"], role))
    return Schedule(tuple(ents))


def load_schedule(path) -> Schedule:
    return parse_schedule(read_json(path), str(path))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
