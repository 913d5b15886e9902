"""Text serialization of coefficient tensors and basis tables.

A coefficient file is a single JSON header line describing the lattice
domain followed by one CSV row per coefficient: the 1-based depth indices,
the 0-based shift indices, then real and imaginary parts printed with 17
significant digits so doubles round-trip exactly.  Rows may arrive in any
order but must cover every multi-index exactly once; the writer emits
canonical (flat-index) order, which makes write(read(file)) byte-identical
for canonical files.
"""

from __future__ import annotations

import json

import numpy as np

from .lattice import CoeffTensor, LatticeDomain, flatten

SCHEMA_VERSION = 1


class CoeffFileError(ValueError):
    """Malformed coefficient file; carries the offending row when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


def _format(value: float) -> str:
    return f"{value:.17g}"


def _header(domain: LatticeDomain, kind: str) -> str:
    payload = {
        "schema": SCHEMA_VERSION,
        "d": domain.d,
        "L": list(domain.shifts),
        "N": list(domain.depths),
        "kind": kind,
    }
    return json.dumps(payload, sort_keys=True, separators=(", ", ": "))


def write_coeff_file(path, tensor: CoeffTensor) -> None:
    """Write a tensor in canonical order; kind is 'real' when imag is all zero."""
    kind = "real" if not tensor.data.imag.any() else "complex"
    domain = tensor.domain
    lines = [_header(domain, kind)]
    for flat in range(domain.size):
        position = np.unravel_index(flat, domain.grid_shape)
        depth_idx = [str(int(p) + 1) for p in position[: domain.d]]
        shift_idx = [str(int(p)) for p in position[domain.d :]]
        value = tensor.data[flat]
        lines.append(
            ",".join(depth_idx + shift_idx + [_format(value.real), _format(value.imag)])
        )
    with open(path, "w", encoding="ascii") as handle:
        handle.write("\n".join(lines) + "\n")


def read_coeff_file(path) -> CoeffTensor:
    """Parse a coefficient file, validating indices, coverage and finiteness."""
    with open(path, "r", encoding="ascii") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise CoeffFileError("empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CoeffFileError(f"invalid JSON header: {exc}", row=1) from exc
    for key in ("schema", "d", "L", "N", "kind"):
        if key not in header:
            raise CoeffFileError(f"header missing key {key!r}", row=1)
    if header["schema"] != SCHEMA_VERSION:
        raise CoeffFileError(f"unsupported schema {header['schema']}", row=1)
    if header["kind"] not in ("real", "complex"):
        raise CoeffFileError(f"unknown value kind {header['kind']!r}", row=1)
    try:
        domain = LatticeDomain(tuple(header["L"]), tuple(header["N"]))
    except (TypeError, ValueError) as exc:
        raise CoeffFileError(f"invalid domain in header: {exc}", row=1) from exc
    if header["d"] != domain.d:
        raise CoeffFileError("header dimension disagrees with L/N lengths", row=1)

    data = np.zeros(domain.size, dtype=np.complex128)
    seen = np.zeros(domain.size, dtype=bool)
    body = [line for line in lines[1:] if line.strip()]
    if len(body) != domain.size:
        raise CoeffFileError(
            f"expected {domain.size} coefficient rows, found {len(body)}"
        )
    for offset, line in enumerate(body):
        row_number = offset + 2
        fields = line.split(",")
        if len(fields) != 2 * domain.d + 2:
            raise CoeffFileError(
                f"expected {2 * domain.d + 2} fields, found {len(fields)}",
                row=row_number,
            )
        try:
            depth_idx = tuple(int(f) for f in fields[: domain.d])
            shift_idx = tuple(int(f) for f in fields[domain.d : 2 * domain.d])
            real = float(fields[2 * domain.d])
            imag = float(fields[2 * domain.d + 1])
        except ValueError as exc:
            raise CoeffFileError(str(exc), row=row_number) from exc
        try:
            flat = flatten(domain, depth_idx, shift_idx)
        except IndexError as exc:
            raise CoeffFileError(str(exc), row=row_number) from exc
        if seen[flat]:
            raise CoeffFileError(
                f"duplicate entry for index {depth_idx + shift_idx}", row=row_number
            )
        seen[flat] = True
        data[flat] = complex(real, imag)
    if header["kind"] == "real" and data.imag.any():
        raise CoeffFileError("kind is 'real' but imaginary parts are nonzero")
    try:
        return CoeffTensor(domain, data)
    except ValueError as exc:
        raise CoeffFileError(str(exc)) from exc


def write_sopw_table(path, basis, table) -> None:
    """Write per-(depth, shift) sparse Fourier coefficients as header + CSV."""
    payload = {
        "schema": SCHEMA_VERSION,
        "kind": "sopw-table",
        "L": basis.num_shifts,
        "N": basis.depth_cap,
    }
    lines = [json.dumps(payload, sort_keys=True, separators=(", ", ": "))]
    for (depth, shift_idx), entries in table:
        for mode, value in entries:
            lines.append(
                ",".join(
                    [str(depth), str(shift_idx), str(mode),
                     _format(value.real), _format(value.imag)]
                )
            )
    with open(path, "w", encoding="ascii") as handle:
        handle.write("\n".join(lines) + "\n")


def read_sopw_table(path):
    """Parse a basis coefficient table; returns ``(L, N, {(k, j): [(n, c)]})``."""
    with open(path, "r", encoding="ascii") as handle:
        lines = handle.read().splitlines()
    if not lines:
        raise CoeffFileError("empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CoeffFileError(f"invalid JSON header: {exc}", row=1) from exc
    if header.get("kind") != "sopw-table":
        raise CoeffFileError("not a basis table file", row=1)
    table: dict = {}
    for offset, line in enumerate(lines[1:]):
        if not line.strip():
            continue
        row_number = offset + 2
        fields = line.split(",")
        if len(fields) != 5:
            raise CoeffFileError(f"expected 5 fields, found {len(fields)}", row=row_number)
        try:
            depth, shift_idx, mode = int(fields[0]), int(fields[1]), int(fields[2])
            value = complex(float(fields[3]), float(fields[4]))
        except ValueError as exc:
            raise CoeffFileError(str(exc), row=row_number) from exc
        table.setdefault((depth, shift_idx), []).append((mode, value))
    return int(header["L"]), int(header["N"]), table
