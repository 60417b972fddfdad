"""Reading and writing datasets, SEM specs and experiment configs."""

from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np
import yaml

from .bayes import DagPriorSpec, PriorSpec
from .graph import Dag
from .scm import Dataset, ScmSpec, law_from_params


def fmt(x: float) -> str:
    """Shortest round-trip float text, so CSV output is reproducible byte for byte."""
    return repr(float(x))


def write_dataset(path, data: Dataset) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"X{j + 1}" for j in range(data.p)])
        for row in data.values:
            w.writerow([fmt(v) for v in row])


def read_dataset(path) -> Dataset:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        values = np.array([[float(v) for v in r] for r in body if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if values.ndim != 2 or values.shape[1] != len(header):
        raise ValueError(f"{path}: rows do not match the {len(header)}-column header")
    return Dataset(values)


def _edge_key(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\s*(\d+)\s*->\s*(\d+)\s*", str(text))
    if not m:
        raise ValueError(f"bad edge key {text!r}; expected 'k->j'")
    return int(m.group(1)) - 1, int(m.group(2)) - 1


def spec_from_dict(d: dict) -> ScmSpec:
    dag = Dag.parse(d["dag"])
    coeffs = {_edge_key(k): float(v) for k, v in (d.get("coefficients") or {}).items()}
    noise = []
    for entry in d["noise"]:
        entry = dict(entry)
        noise.append(law_from_params(entry.pop("law"), entry))
    return ScmSpec(dag, coeffs, tuple(noise), name=d.get("name", ""))


def spec_to_dict(spec: ScmSpec) -> dict:
    return {
        "name": spec.name,
        "dag": str(spec.dag),
        "coefficients": {f"{k + 1}->{j + 1}": float(spec.coeffs[(k, j)]) for k, j in spec.dag.edges()},
        "noise": [{"law": law.name, **law.params()} for law in spec.noise],
    }


def prior_from_dict(d: dict | None) -> PriorSpec:
    return PriorSpec(**(d or {}))


def prior_to_dict(prior: PriorSpec) -> dict:
    return {"coeff_prior": prior.coeff_prior, "tau2": prior.tau2, "g": prior.g, "shape": prior.shape, "rate": prior.rate}


def dag_prior_from_dict(d: dict | None) -> DagPriorSpec:
    return DagPriorSpec(**(d or {}))


def dag_prior_to_dict(prior: DagPriorSpec) -> dict:
    return {"kind": prior.kind, "alpha": prior.alpha, "d": prior.d, "gap_sigma": prior.gap_sigma}


def load_yaml(path) -> dict:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a mapping at top level")
    return data


def dump_yaml(path, data: dict) -> None:
    Path(path).write_text(yaml.safe_dump(data, sort_keys=False))
