"""JSON reading and deterministic, atomic writing."""
from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np

from .gallery import Fixture
from .network import Network
from .planar import PlanarEmbedding

SIG_DIGITS = 12


def parse_number(x) -> float:
    """Float from a JSON number or a ``"p/q"`` string."""
    if isinstance(x, str):
        return float(Fraction(x))
    return float(x)


def network_from_json(data: dict, name: str = "network") -> Fixture:
    """Network, boundary values, optional energies and optional embedding."""
    edges = [(e["id"], e["tail"], e["head"]) for e in data["edges"]]
    net = Network.build(data["vertices"], edges, data["boundary"])
    u = {b: parse_number(data["u"][b]) for b in net.boundary} if "u" in data else {}
    energies = None
    if "energies" in data:
        energies = net.edge_array({k: parse_number(v) for k, v in data["energies"].items()})
    emb = None
    if data.get("embedding"):
        outer = tuple(data["outer"]) if data.get("outer") else None
        emb = PlanarEmbedding(net, {v: list(r) for v, r in data["embedding"].items()}, outer)
    return Fixture(name, net, u, energies, emb)


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def load_network(path) -> Fixture:
    return network_from_json(load_json(path), Path(path).stem)


def to_plain(obj):
    """Recursively convert to JSON-ready values with floats at 12 significant
    digits and rationals as ``"p/q"`` strings."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return None
        r = float(format(x, f".{SIG_DIGITS}g"))
        return 0.0 if r == 0 else r
    if isinstance(obj, np.ndarray):
        return [to_plain(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    return obj


def dumps(obj) -> str:
    return json.dumps(to_plain(obj), indent=2) + "\n"


def write_text_atomic(path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        # mkstemp creates 0600; keep the mode of a file being replaced
        os.chmod(tmp, path.stat().st_mode & 0o777 if path.exists() else 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj, path=None) -> str:
    text = dumps(obj)
    if path is not None:
        write_text_atomic(path, text)
    return text
