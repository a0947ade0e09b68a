"""Channel/dataset text formats and the JSON report writer.

Channel file::

    # diagnostic test
    kind: discrete
    emission: + -
    ill      0.9 0.1
    healthy  0.1 0.9

``kind`` is one of ``discrete`` (``emission:`` header naming the symbols, then
one row per latent state with an optional leading state label), ``identity``
(``symbols: a b c``), ``binary_test`` (``eps1:`` and ``eps2:``) or ``gaussian``
(``gaussian:`` then one ``state mu sigma`` line per latent state).

Dataset file: a ``#kind: discrete|continuous`` header, then one observation per
line (a symbol label, or a decimal literal).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

from .channels import DiscreteChannel, GaussianChannel, IdentityChannel, binary_test_channel
from .core import ManifestDataset, NearIgnoranceError, ObservationKind


class ParseError(NearIgnoranceError):
    pass


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _float(tok: str, where: str) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise ParseError(f"{where}: expected a number, got {tok!r}") from None
    if not math.isfinite(val):
        raise ParseError(f"{where}: non-finite number {tok!r}")
    return val


def parse_channel(text: str, source: str = "<channel>"):
    kind = None
    fields: dict[str, list[str]] = {}
    rows: list[tuple[int, list[str]]] = []
    section = None
    for lineno, line in _lines(text):
        where = f"{source}:{lineno}"
        key, sep, rest = line.partition(":")
        if sep and key.strip() in ("kind", "symbols", "states", "eps1", "eps2", "emission", "gaussian"):
            key = key.strip()
            if key == "kind":
                kind = rest.strip()
            elif key in ("emission", "gaussian"):
                section = key
                fields[key] = rest.split()
            else:
                fields[key] = rest.split()
            continue
        if section is None:
            raise ParseError(f"{where}: unexpected line {line!r}")
        rows.append((lineno, line.split()))

    if kind is None:
        raise ParseError(f"{source}: missing 'kind:' line")
    states = fields.get("states")
    try:
        if kind == "identity":
            symbols = fields.get("symbols")
            if not symbols:
                raise ParseError(f"{source}: identity channel needs 'symbols:'")
            return IdentityChannel(len(symbols), symbols=symbols)
        if kind == "binary_test":
            eps = []
            for name in ("eps1", "eps2"):
                if name not in fields or len(fields[name]) != 1:
                    raise ParseError(f"{source}: binary_test channel needs '{name}: value'")
                eps.append(_float(fields[name][0], f"{source} ({name})"))
            return binary_test_channel(*eps)
        if kind == "discrete":
            symbols = fields.get("emission")
            if not symbols:
                raise ParseError(f"{source}: discrete channel needs 'emission:' with symbol names")
            labels, matrix = [], []
            for lineno, toks in rows:
                where = f"{source}:{lineno}"
                if len(toks) == len(symbols) + 1:
                    labels.append(toks[0])
                    toks = toks[1:]
                elif len(toks) != len(symbols):
                    raise ParseError(f"{where}: expected {len(symbols)} probabilities, got {len(toks)}")
                matrix.append([_float(t, where) for t in toks])
            if labels and len(labels) != len(matrix):
                raise ParseError(f"{source}: label either every emission row or none")
            return DiscreteChannel(matrix, symbols=symbols, states=labels or states)
        if kind == "gaussian":
            labels, params = [], []
            for lineno, toks in rows:
                where = f"{source}:{lineno}"
                if len(toks) != 3:
                    raise ParseError(f"{where}: expected 'state mu sigma'")
                labels.append(toks[0])
                params.append((_float(toks[1], where), _float(toks[2], where)))
            return GaussianChannel(params, states=labels)
    except ParseError:
        raise
    except NearIgnoranceError as exc:
        raise ParseError(f"{source}: {exc}") from exc
    raise ParseError(f"{source}: unknown channel kind {kind!r}")


def read_channel(path) -> object:
    path = Path(path)
    return parse_channel(path.read_text(), str(path))


def format_channel(channel) -> str:
    if isinstance(channel, GaussianChannel):
        lines = ["kind: gaussian", "gaussian:"]
        lines += [f"{s} {mu!r} {sd!r}" for s, (mu, sd) in zip(channel.states, channel.params)]
    elif isinstance(channel, IdentityChannel):
        lines = ["kind: identity", "symbols: " + " ".join(channel.symbols)]
    else:
        lines = ["kind: discrete", "emission: " + " ".join(channel.symbols)]
        for state, row in zip(channel.states, channel.emission.tolist()):
            lines.append(state + " " + " ".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_dataset(text: str, channel, source: str = "<data>") -> ManifestDataset:
    kind = None
    obs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            if key.strip() == "kind":
                kind = value.strip()
                if kind not in (ObservationKind.DISCRETE, ObservationKind.CONTINUOUS):
                    raise ParseError(f"{source}:{lineno}: unknown dataset kind {kind!r}")
            continue
        if kind is None:
            raise ParseError(f"{source}:{lineno}: observation before the '#kind:' header")
        if kind == ObservationKind.DISCRETE:
            if not hasattr(channel, "symbol_id"):
                raise ParseError(f"{source}:{lineno}: discrete data needs a discrete channel")
            try:
                obs.append(channel.symbol_id(line))
            except NearIgnoranceError as exc:
                raise ParseError(f"{source}:{lineno}: {exc}") from None
        else:
            obs.append(_float(line, f"{source}:{lineno}"))
    if kind is None:
        raise ParseError(f"{source}: missing '#kind:' header")
    if kind != channel.kind:
        raise ParseError(f"{source}: {kind} data does not match a {channel.kind} channel")
    return ManifestDataset(tuple(obs), kind)


def read_dataset(path, channel) -> ManifestDataset:
    path = Path(path)
    return parse_dataset(path.read_text(), channel, str(path))


def format_dataset(data: ManifestDataset, channel) -> str:
    lines = [f"#kind: {data.kind}"]
    if data.kind == ObservationKind.DISCRETE:
        lines += [channel.symbols[o] for o in data.observations]
    else:
        lines += [repr(float(v)) for v in data.observations]
    return "\n".join(lines) + "\n"


# -- reports ------------------------------------------------------------------


def _format_float(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion-ordered keys and floats printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):
        return dumps(obj.item(), indent, _level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def atomic_write(path, text: str):
    """Write via a temporary file in the same directory, so readers never see a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
