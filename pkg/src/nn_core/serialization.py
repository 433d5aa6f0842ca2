"""JSON documents for networks: {"input_dim", "hidden_sizes", "activation", "weights"}."""

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

from src.exceptions import PreconditionError
from src.nn_core.network import Architecture, MlpNetwork


def network_to_dict(net: MlpNetwork) -> Dict[str, Any]:
    return {
        "input_dim": net.input_dim,
        "hidden_sizes": list(net.hidden_sizes),
        "activation": net.activation,
        "weights": [float(w) for w in net.weights],
    }


def network_from_dict(doc: Dict[str, Any]) -> MlpNetwork:
    missing = {"input_dim", "hidden_sizes", "activation", "weights"} - set(doc)
    if missing:
        raise PreconditionError(f"Network document is missing {sorted(missing)}")
    arch = Architecture(
        input_dim=int(doc["input_dim"]),
        hidden_sizes=tuple(doc["hidden_sizes"]),
        activation=doc["activation"],
    )
    return MlpNetwork(arch, doc["weights"])


def dumps_network(net: MlpNetwork) -> str:
    """Serialize with 17 significant digits per weight so finite doubles round-trip exactly."""
    doc = network_to_dict(net)
    weights = ", ".join(format(w, ".17g") for w in doc.pop("weights"))
    head = json.dumps(doc)[:-1]
    return f'{head}, "weights": [{weights}]}}'


def loads_network(text: str) -> MlpNetwork:
    return network_from_dict(json.loads(text))


def save_network(net: MlpNetwork, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    with os.fdopen(fd, "w") as f:
        f.write(dumps_network(net))
    os.replace(tmp, path)
    return path


def load_network(path: Union[str, Path]) -> MlpNetwork:
    with open(path, "r") as f:
        return loads_network(f.read())
