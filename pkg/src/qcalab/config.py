"""
Circuit definition files.

A definition is a JSON document::

    {
      "subcell_dims": [2, 2],
      "lattice_cells": 5,
      "layers": [
        {"kind": "advection", "offsets": [0, -1]},
        {"kind": "scattering", "matrix": [[[1, 0], [0, 0]], ...]}
      ],
      "constructions": [{"shift": [-1, 0], "m": 1}]
    }

Complex entries are ``[re, im]`` pairs. ``lattice_cells`` and
``constructions`` are optional. Parsing keeps the numbers exactly as written,
so serializing and re-parsing gives an identical structure; scattering
matrices are re-unitarized only when a circuit is built.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lattice import Lattice
from .linalg import nearest_unitary
from .qca import AdvectionLayer, CellConstruction, Circuit, ScatteringLayer

LOAD_UNITARY_TOL = 1e-8
ADVECTION = "advection"
SCATTERING = "scattering"


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    offsets: tuple = None
    matrix: tuple = None  # rows of (re, im) pairs

    def complex_matrix(self) -> np.ndarray:
        return np.array([[complex(re, im) for re, im in row] for row in self.matrix])

    def to_dict(self) -> dict:
        if self.kind == ADVECTION:
            return {"kind": ADVECTION, "offsets": list(self.offsets)}
        return {"kind": SCATTERING, "matrix": [[[re, im] for re, im in row] for row in self.matrix]}


@dataclass(frozen=True)
class CircuitConfig:
    subcell_dims: tuple
    layers: tuple
    lattice_cells: int = None
    constructions: tuple = ()

    def to_dict(self) -> dict:
        out = {"subcell_dims": list(self.subcell_dims)}
        if self.lattice_cells is not None:
            out["lattice_cells"] = self.lattice_cells
        out["layers"] = [layer.to_dict() for layer in self.layers]
        if self.constructions:
            out["constructions"] = [
                {"shift": list(c.shift_offsets), "m": c.group} for c in self.constructions
            ]
        return out

    def scattering_matrices(self) -> list:
        return [nearest_unitary(layer.complex_matrix()) for layer in self.layers if layer.kind == SCATTERING]

    def reach(self) -> int:
        return sum(max(abs(e) for e in layer.offsets) for layer in self.layers if layer.kind == ADVECTION)

    def default_cells(self) -> int:
        """Smallest lattice on which one step's light cone cannot wrap onto itself."""
        return max(5, 2 * self.reach() + 3)

    def circuit(self, n_cells: int = None) -> Circuit:
        """Build the circuit on ``n_cells`` cells (default: ``lattice_cells``, else :meth:`default_cells`)."""
        n = n_cells if n_cells is not None else (self.lattice_cells or self.default_cells())
        lattice = Lattice.of(n, self.subcell_dims)
        layers = []
        for layer in self.layers:
            if layer.kind == ADVECTION:
                layers.append(AdvectionLayer(layer.offsets))
            else:
                layers.append(ScatteringLayer(nearest_unitary(layer.complex_matrix())))
        return Circuit(lattice, layers)


def _int(value, field):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field=field)
    return value


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {value!r}", field=field)
    return float(value)


def _list(value, field):
    if not isinstance(value, list):
        raise ConfigError(f"expected a list, got {type(value).__name__}", field=field)
    return value


def _parse_matrix(raw, side, field):
    rows = _list(raw, field)
    if len(rows) != side:
        raise ConfigError(f"expected {side} rows, got {len(rows)}", field=field)
    out = []
    for i, row in enumerate(rows):
        row = _list(row, f"{field}[{i}]")
        if len(row) != side:
            raise ConfigError(f"expected {side} entries, got {len(row)}", field=f"{field}[{i}]")
        entries = []
        for j, pair in enumerate(row):
            where = f"{field}[{i}][{j}]"
            pair = _list(pair, where)
            if len(pair) != 2:
                raise ConfigError("complex entries are [re, im] pairs", field=where)
            entries.append((_number(pair[0], where), _number(pair[1], where)))
        out.append(tuple(entries))
    matrix = np.array([[complex(re, im) for re, im in row] for row in out])
    err = np.max(np.abs(matrix.conj().T @ matrix - np.eye(side)))
    if err > LOAD_UNITARY_TOL:
        raise ConfigError(f"matrix is not unitary (max deviation {err:.3g})", field=field)
    return tuple(out)


def _parse_layer(raw, index, dims) -> LayerSpec:
    field = f"layers[{index}]"
    if not isinstance(raw, dict):
        raise ConfigError("a layer must be an object", field=field)
    kind = raw.get("kind")
    if kind == ADVECTION:
        unknown = set(raw) - {"kind", "offsets"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", field=field)
        offsets = _list(raw.get("offsets"), f"{field}.offsets")
        if len(offsets) != len(dims):
            raise ConfigError(
                f"{len(offsets)} offsets for {len(dims)} subcells", field=f"{field}.offsets"
            )
        return LayerSpec(ADVECTION, offsets=tuple(_int(e, f"{field}.offsets") for e in offsets))
    if kind == SCATTERING:
        unknown = set(raw) - {"kind", "matrix"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", field=field)
        side = math.prod(dims)
        return LayerSpec(SCATTERING, matrix=_parse_matrix(raw.get("matrix"), side, f"{field}.matrix"))
    raise ConfigError(f"kind must be '{ADVECTION}' or '{SCATTERING}', got {kind!r}", field=f"{field}.kind")


def _parse_construction(raw, index, d) -> CellConstruction:
    field = f"constructions[{index}]"
    if not isinstance(raw, dict):
        raise ConfigError("a construction must be an object", field=field)
    shift = _list(raw.get("shift"), f"{field}.shift")
    if len(shift) != d:
        raise ConfigError(f"{len(shift)} shifts for {d} subcells", field=f"{field}.shift")
    m = _int(raw.get("m", 1), f"{field}.m")
    if m < 1:
        raise ConfigError("m must be >= 1", field=f"{field}.m")
    return CellConstruction(tuple(_int(c, f"{field}.shift") for c in shift), m)


def _element_lines(text: str, key: str) -> list:
    """Line numbers where the elements of the top-level array ``key`` start."""
    match = re.search(r'"%s"\s*:\s*\[' % re.escape(key), text)
    if match is None:
        return []
    decoder = json.JSONDecoder()
    pos = match.end()
    lines = []
    while True:
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            return lines
        lines.append(text.count("\n", 0, pos) + 1)
        try:
            _, pos = decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            return lines


def _locate(exc: ConfigError, text: str) -> ConfigError:
    match = re.match(r"(layers|constructions)\[(\d+)\]", exc.field or "")
    if match is None or exc.line is not None:
        return exc
    lines = _element_lines(text, match.group(1))
    index = int(match.group(2))
    if index >= len(lines):
        return exc
    message = str(exc).split("] ", 1)[1]
    return ConfigError(message, field=exc.field, line=lines[index])


def parse_config(text: str) -> CircuitConfig:
    """Parse and validate a definition; errors carry the offending field and, where known, its line."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    try:
        return _validate(raw)
    except ConfigError as exc:
        raise _locate(exc, text) from None


def _validate(raw) -> CircuitConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object")
    unknown = set(raw) - {"subcell_dims", "lattice_cells", "layers", "constructions"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")

    if "subcell_dims" not in raw:
        raise ConfigError("missing", field="subcell_dims")
    dims = tuple(_int(d, "subcell_dims") for d in _list(raw["subcell_dims"], "subcell_dims"))
    if not dims or any(d < 2 for d in dims):
        raise ConfigError("need at least one subcell, each of dimension >= 2", field="subcell_dims")

    cells = raw.get("lattice_cells")
    if cells is not None:
        cells = _int(cells, "lattice_cells")
        if cells < 2:
            raise ConfigError("need at least 2 cells", field="lattice_cells")

    if "layers" not in raw:
        raise ConfigError("missing", field="layers")
    layers = tuple(_parse_layer(layer, i, dims) for i, layer in enumerate(_list(raw["layers"], "layers")))
    constructions = tuple(
        _parse_construction(c, i, len(dims))
        for i, c in enumerate(_list(raw.get("constructions", []), "constructions"))
    )
    return CircuitConfig(dims, layers, cells, constructions)


def load_config(path) -> CircuitConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def dumps_config(config: CircuitConfig) -> str:
    return json.dumps(config.to_dict(), indent=2)


def config_from_circuit(circuit: Circuit, constructions=()) -> CircuitConfig:
    """Definition of a circuit built from whole-cell layers."""
    layers = []
    for layer in circuit.layers:
        if isinstance(layer, AdvectionLayer):
            if layer.sources is not None:
                raise ValueError("advections that exchange subcells have no file representation")
            layers.append(LayerSpec(ADVECTION, offsets=tuple(layer.offsets)))
        else:
            if layer.subcells is not None:
                raise ValueError("partial-cell scattering has no file representation")
            rows = tuple(tuple((float(z.real), float(z.imag)) for z in row) for row in layer.s)
            layers.append(LayerSpec(SCATTERING, matrix=rows))
    return CircuitConfig(
        circuit.lattice.cell.subcell_dims, tuple(layers), circuit.lattice.n_cells, tuple(constructions)
    )
