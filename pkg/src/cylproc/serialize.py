"""JSON descriptors for bodies and realizations.

Bodies are single-key mappings::

    {"ball": {"radius": 0.5, "center": [0, 0]}}
    {"box": {"half_extents": [1, 1, 1]}}         # or {"edges": [...]}
    {"polytope": {"vertices": [[...], ...]}}
    {"halfspaces": {"normals": [[...], ...], "offsets": [...]}}
"""
from __future__ import annotations

import json

import numpy as np

from . import geometry as geo
from .errors import ConfigError, CylprocError

__all__ = ["body_to_spec", "body_from_spec", "realization_to_dict",
           "realization_from_dict", "realization_to_json", "realization_from_json"]


def body_to_spec(body):
    if isinstance(body, geo.Ball):
        return {"ball": {"center": body.center.tolist(), "radius": float(body.radius)}}
    if isinstance(body, geo.Box):
        return {"box": {"center": body.center.tolist(),
                        "half_extents": body.half_extents.tolist()}}
    if isinstance(body, geo.PolytopeV):
        return {"polytope": {"vertices": body.vertices.tolist()}}
    if isinstance(body, geo.PolytopeH):
        return {"halfspaces": {"normals": body.normals.tolist(),
                               "offsets": body.offsets.tolist()}}
    raise TypeError(f"cannot serialise {type(body).__name__}")


def _field(spec, key, where):
    if key not in spec:
        raise ConfigError(f"{where}: missing field '{key}'")
    return spec[key]


def body_from_spec(spec, dim=None, where="body"):
    """Build a body from its descriptor; ``dim`` is the expected dimension."""
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"{where}: expected a single-key mapping such as "
                          "{'ball': {...}}")
    (kind, args), = spec.items()
    if not isinstance(args, dict):
        raise ConfigError(f"{where}.{kind}: expected a mapping of fields")
    try:
        if kind == "ball":
            r = float(_field(args, "radius", f"{where}.ball"))
            center = args.get("center")
            if center is None:
                if dim is None:
                    raise ConfigError(f"{where}.ball: 'center' needed when the dimension is implicit")
                center = np.zeros(dim)
            body = geo.Ball(center, r)
        elif kind == "box":
            if "edges" in args:
                body = geo.Box.from_edges(args["edges"], args.get("center"))
            else:
                h = _field(args, "half_extents", f"{where}.box")
                center = args.get("center", np.zeros(len(h)))
                body = geo.Box(center, h)
        elif kind == "polytope":
            body = geo.PolytopeV(_field(args, "vertices", f"{where}.polytope"))
        elif kind == "halfspaces":
            body = geo.PolytopeH(_field(args, "normals", f"{where}.halfspaces"),
                                 _field(args, "offsets", f"{where}.halfspaces"))
        else:
            raise ConfigError(f"{where}: unknown body kind '{kind}' "
                              "(ball, box, polytope, halfspaces)")
    except ConfigError:
        raise
    except (CylprocError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}.{kind}: {exc}") from exc
    if dim is not None and body.dim != dim:
        raise ConfigError(f"{where}: body lives in R^{body.dim}, expected R^{dim}")
    return body


def realization_to_dict(real):
    return {
        "window": body_to_spec(real.window),
        "sampling_radius": float(real.sampling_radius),
        "n_candidates": int(real.n_candidates),
        "cylinders": [
            {"x": c.x.tolist(), "theta": c.theta.matrix.tolist(),
             "base": body_to_spec(c.base)}
            for c in real.cylinders
        ],
    }


def realization_from_dict(data):
    from .process import Cylinder, Realization

    window = body_from_spec(data["window"], where="window")
    cyls = [Cylinder(np.asarray(c["x"], float), geo.Rotation(np.asarray(c["theta"])),
                     body_from_spec(c["base"], where="base"))
            for c in data["cylinders"]]
    return Realization(cyls, window, float(data["sampling_radius"]),
                       int(data.get("n_candidates", 0)))


def realization_to_json(real):
    return json.dumps(realization_to_dict(real), sort_keys=True)


def realization_from_json(text):
    return realization_from_dict(json.loads(text))
