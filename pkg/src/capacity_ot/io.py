"""JSON encoding of instances and plans (format version 1).

Instance::

    {"version": 1, "X": [...], "Y": [...], "cost": [[...]],
     "mu": <capacity>, "nu": <capacity>}

where a capacity is ``{"type": "explicit", "values": [...2**n by mask]}``,
``{"type": "distorted", "weights": [...], "alpha": a}`` or
``{"type": "distorted-pl", "weights": [...], "knots": [[t, u], ...]}``.

Plan::

    {"version": 1, "ground": "XxY", "values": [...2**(n*m) by mask]}

Floats are written with ``repr``, which round-trips exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import CapacityError, DistortionError, InstanceFormatError
from .setfunc import Capacity, DistortionSpec, GroundSet, capacity_from_values, classify, distorted
from .transport import CH, CH_STAR, STORAGE_GUARD, TransportInstance, TransportPlan

VERSION = 1


def _floats(values) -> list:
    return [float(v) for v in np.asarray(values, dtype=float).reshape(-1)]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def capacity_to_json(cap: Capacity) -> dict:
    return {"type": "explicit", "values": _floats(cap.values)}


def capacity_from_json(obj, ground: GroundSet, where: str = "capacity") -> Capacity:
    if not isinstance(obj, dict) or "type" not in obj:
        raise InstanceFormatError(f"{where}: expected an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "explicit":
            values = obj["values"]
            expected = 1 << ground.n
            if not isinstance(values, list) or len(values) != expected:
                got = len(values) if isinstance(values, list) else type(values).__name__
                raise InstanceFormatError(f"{where}: explicit values must have length {expected} (2**{ground.n}), got {got}")
            return capacity_from_values(ground, values)
        if kind == "distorted":
            return distorted(DistortionSpec(tuple(obj["weights"]), alpha=float(obj["alpha"])), ground)
        if kind == "distorted-pl":
            return distorted(DistortionSpec(tuple(obj["weights"]), knots=tuple(map(tuple, obj["knots"]))), ground)
    except KeyError as exc:
        raise InstanceFormatError(f"{where}: missing field {exc.args[0]!r}") from None
    except CapacityError as exc:
        raise CapacityError(f"{where}: {exc}", exc.masks) from None
    except DistortionError as exc:
        raise DistortionError(f"{where}: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"{where}: {exc}") from None
    raise InstanceFormatError(f"{where}: unknown capacity type {kind!r}")


def instance_to_json(inst: TransportInstance) -> dict:
    return {
        "version": VERSION,
        "X": list(inst.X.labels),
        "Y": list(inst.Y.labels),
        "cost": [_floats(row) for row in inst.cost],
        "mu": capacity_to_json(inst.mu),
        "nu": capacity_to_json(inst.nu),
    }


def _parse(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _check_version(obj, source):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{source}: top level must be an object")
    if obj.get("version") != VERSION:
        raise InstanceFormatError(f"{source}: unsupported version {obj.get('version')!r}, expected {VERSION}")


def instance_from_json(obj, source: str = "<instance>", max_cells: int = STORAGE_GUARD) -> TransportInstance:
    _check_version(obj, source)
    try:
        X = GroundSet(tuple(obj["X"]))
        Y = GroundSet(tuple(obj["Y"]))
        cost = np.array(obj["cost"], dtype=float)
        mu_obj, nu_obj = obj["mu"], obj["nu"]
    except KeyError as exc:
        raise InstanceFormatError(f"{source}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{source}: {exc}") from None
    if cost.shape != (X.n, Y.n):
        raise InstanceFormatError(f"{source}: cost must be {X.n}x{Y.n}, got shape {cost.shape}")
    mu = capacity_from_json(mu_obj, X, f"{source}: mu")
    nu = capacity_from_json(nu_obj, Y, f"{source}: nu")
    return TransportInstance(X, Y, cost, mu, nu, max(max_cells, STORAGE_GUARD))


def load_instance(path, max_cells: int = STORAGE_GUARD) -> TransportInstance:
    path = Path(path)
    return instance_from_json(_parse(path.read_text(), str(path)), str(path), max_cells)


def save_instance(inst: TransportInstance, path) -> None:
    Path(path).write_text(dumps(instance_to_json(inst)))


def plan_to_json(pi: TransportPlan) -> dict:
    return {"version": VERSION, "ground": "XxY", "values": _floats(pi.values)}


def plan_from_json(obj, inst: TransportInstance, source: str = "<plan>") -> TransportPlan:
    """Accepts a plan object or any object carrying one under ``"plan"``."""
    if isinstance(obj, dict) and "plan" in obj and isinstance(obj["plan"], dict):
        obj = obj["plan"]
    _check_version(obj, source)
    if obj.get("ground") != "XxY":
        raise InstanceFormatError(f"{source}: plan ground must be 'XxY'")
    values = obj.get("values")
    n, m = inst.shape
    if not isinstance(values, list) or len(values) != 1 << (n * m):
        raise InstanceFormatError(f"{source}: plan needs {1 << (n * m)} values for a {n}x{m} instance")
    cap = capacity_from_values(inst.product_ground, values)
    tag = CH_STAR if classify(cap, 1e-9).supermodular else CH
    return TransportPlan(cap, (n, m), tag)


def load_plan(path, inst: TransportInstance) -> TransportPlan:
    path = Path(path)
    return plan_from_json(_parse(path.read_text(), str(path)), inst, str(path))


def finite_or_none(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else float(x)
