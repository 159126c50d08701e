"""File formats of the command line: games, strategies, codes, witnesses and reports.

Matrices are nested JSON arrays with every complex entry written as
[re, im], row-major. Reports are dumped with sorted keys and floats at 17
significant digits so that identical runs produce identical bytes.
"""

import csv
import io
import json
import re
from typing import Any

import numpy as np
from pydantic import BaseModel, ValidationError

from src.core.exceptions import CompatibilityError, SchemaError
from src.dilation.schemas import DilationWitness
from src.games.schemas import Game
from src.qldt.schemas import CodeF2
from src.strategies.schemas import BipartiteStrategy, TracialAlgebra, TracialStrategy

_FLOAT_MARK = "\x00f17:"
_FLOAT_RE = re.compile(r'"\\u0000f17:([^"]*)"')


def _loads(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Malformed {what} JSON: {e.msg}", e.lineno, e.colno) from e


def _require(data: dict, key: str, what: str) -> Any:
    if not isinstance(data, dict) or key not in data:
        raise SchemaError(f"{what} is missing the {key!r} field")
    return data[key]


def _validated(model: type[BaseModel], what: str, **fields) -> Any:
    try:
        return model(**fields)
    except ValidationError as e:
        first = e.errors()[0]
        raise SchemaError(f"Invalid {what}: {first['msg']}") from e


# Matrices


def parse_matrix(data, name: str) -> np.ndarray:
    """Nested arrays of [re, im] pairs to a complex array."""
    try:
        arr = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{name} is not a rectangular numeric array") from e
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise SchemaError(f"{name} entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def dump_matrix(M) -> list:
    """Complex array to nested [re, im] arrays."""
    M = np.asarray(M, dtype=np.complex128)
    return np.stack([M.real, M.imag], axis=-1).tolist()


# Games


def parse_game(text: str) -> Game:
    """Game JSON: questions, answers per question, nu and the winning predicate entries.

    Predicate entries are {"x", "y", "a", "b", "win"} records; unlisted
    entries lose.

    Raises
    ------
    SchemaError
        On malformed JSON, unknown labels or an invalid game
    """
    data = _loads(text, "game")
    try:
        questions = tuple(str(q) for q in _require(data, "questions", "Game"))
        answers = {str(x): tuple(str(a) for a in v) for x, v in _require(data, "answers", "Game").items()}
        nu = np.asarray(_require(data, "nu", "Game"), dtype=np.float64)
    except (AttributeError, TypeError, ValueError) as e:
        raise SchemaError("Game needs a question list, an answer table and a numeric nu") from e

    X = len(questions)
    n = max((len(v) for v in answers.values()), default=1)
    predicate = np.zeros((X, X, n, n))
    for i, entry in enumerate(_require(data, "predicate", "Game")):
        try:
            x, y = questions.index(str(entry["x"])), questions.index(str(entry["y"]))
            a = answers[questions[x]].index(str(entry["a"]))
            b = answers[questions[y]].index(str(entry["b"]))
            win = entry.get("win", 1)
        except (AttributeError, KeyError, ValueError, TypeError) as e:
            raise SchemaError(f"Predicate entry {i} names an unknown question or answer: {entry}") from e
        if win not in (0, 1):
            raise SchemaError(f"Predicate entry {i} has win={win!r}, expected 0 or 1")
        predicate[x, y, a, b] = win
    return _validated(Game, "game", questions=questions, answers=answers, nu=nu, predicate=predicate)


def dump_game(G: Game) -> dict:
    predicate = [
        {
            "x": G.questions[x],
            "y": G.questions[y],
            "a": G.answers[G.questions[x]][a],
            "b": G.answers[G.questions[y]][b],
            "win": 1,
        }
        for x, y, a, b in zip(*np.nonzero(G.predicate))
    ]
    return {
        "questions": list(G.questions),
        "answers": {x: list(v) for x, v in G.answers.items()},
        "nu": G.nu.tolist(),
        "predicate": predicate,
    }


# Strategies


def _family(data, dim: int, name: str, game: Game | None) -> np.ndarray:
    """{x: {a: matrix}} to an (X, n, dim, dim) array in the game's label order when given."""
    if not isinstance(data, dict) or not data:
        raise SchemaError(f"{name} must map questions to answer tables")
    if game is not None:
        if set(data) != set(game.questions):
            raise CompatibilityError(
                f"{name} answers questions {sorted(data)}, the game asks {sorted(game.questions)}"
            )
        questions = list(game.questions)
        labels = {x: list(game.answers[x]) for x in questions}
        for x in questions:
            extra = set(data[x]) - set(labels[x])
            if extra:
                raise CompatibilityError(f"{name} uses answers {sorted(extra)} not offered for question {x!r}")
    else:
        questions = list(data)
        labels = {x: list(data[x]) for x in questions}

    n = max(len(v) for v in labels.values())
    family = np.zeros((len(questions), n, dim, dim), dtype=np.complex128)
    for i, x in enumerate(questions):
        for j, a in enumerate(labels[x]):
            if a not in data[x]:
                continue
            M = parse_matrix(data[x][a], f"{name}[{x}][{a}]")
            if M.shape != (dim, dim):
                raise SchemaError(f"{name}[{x}][{a}] has shape {M.shape}, expected ({dim}, {dim})")
            family[i, j] = M
    return family


def _dump_family(family: np.ndarray, game: Game | None = None) -> dict:
    out = {}
    for i, ops in enumerate(family):
        x = game.questions[i] if game is not None else str(i)
        labels = game.answers[x] if game is not None else [str(a) for a in range(len(ops))]
        out[x] = {a: dump_matrix(ops[j]) for j, a in enumerate(labels)}
    return out


def parse_strategy(text: str, game: Game | None = None) -> BipartiteStrategy:
    """Strategy JSON: dimA, dimB, psi and the families A, B keyed by question then answer.

    With a game, the families follow its question and answer order and
    answers the file omits get zero operators.

    Raises
    ------
    SchemaError
        On malformed JSON or an invalid strategy
    CompatibilityError
        If the labels do not fit the game
    """
    data = _loads(text, "strategy")
    try:
        dim_a, dim_b = int(_require(data, "dimA", "Strategy")), int(_require(data, "dimB", "Strategy"))
    except (TypeError, ValueError) as e:
        raise SchemaError("dimA and dimB must be integers") from e
    psi = parse_matrix(_require(data, "psi", "Strategy"), "psi").ravel()
    A = _family(_require(data, "A", "Strategy"), dim_a, "A", game)
    B = _family(_require(data, "B", "Strategy"), dim_b, "B", game)
    return _validated(BipartiteStrategy, "strategy", dim_a=dim_a, dim_b=dim_b, psi=psi, A=A, B=B)


def dump_strategy(S: BipartiteStrategy, game: Game | None = None) -> dict:
    return {
        "dimA": S.dim_a,
        "dimB": S.dim_b,
        "psi": dump_matrix(S.psi),
        "A": _dump_family(S.A, game),
        "B": _dump_family(S.B, game),
    }


def parse_tracial(text: str, game: Game | None = None) -> TracialStrategy:
    """Tracial JSON: blocks as [dim, weight] pairs, the family A and the pvm flag.

    With a game, A follows its question and answer labels as in `parse_strategy`.
    """
    data = _loads(text, "tracial strategy")
    try:
        blocks = tuple((int(d), float(w)) for d, w in _require(data, "blocks", "Tracial strategy"))
    except (TypeError, ValueError) as e:
        raise SchemaError("blocks must be [dim, weight] pairs") from e
    algebra = _validated(TracialAlgebra, "tracial algebra", blocks=blocks)
    A = _family(_require(data, "A", "Tracial strategy"), algebra.dim, "A", game)
    return _validated(TracialStrategy, "tracial strategy", algebra=algebra, A=A, pvm=bool(data.get("pvm", False)))


def dump_tracial(S: TracialStrategy, game: Game | None = None) -> dict:
    return {"blocks": [list(b) for b in S.algebra.blocks], "A": _dump_family(S.A, game), "pvm": S.pvm}


# Codes


def parse_code(text: str) -> CodeF2:
    """Generator rows as 0/1 text lines, or JSON {"generator": [[bits]]} / [[bits]].

    Blank lines and lines starting with '#' are skipped in the text form.
    """
    stripped = text.lstrip()
    if stripped.startswith(("{", "[")):
        data = _loads(text, "code")
        rows = data.get("generator") if isinstance(data, dict) else data
        if not isinstance(rows, list) or not rows:
            raise SchemaError("Code JSON needs a non-empty generator array")
        try:
            generator = np.asarray(rows, dtype=np.int64)
        except (TypeError, ValueError) as e:
            raise SchemaError("Generator rows must be equal-length bit arrays") from e
        if generator.ndim != 2 or not np.all((generator == 0) | (generator == 1)):
            raise SchemaError("Generator rows must be equal-length bit arrays")
        return _validated(CodeF2, "code", generator=generator.astype(np.uint8))

    rows, width = [], None
    for lineno, line in enumerate(text.splitlines(), start=1):
        row = line.strip()
        if not row or row.startswith("#"):
            continue
        for col, ch in enumerate(line, start=1):
            if ch not in "01" and not ch.isspace():
                raise SchemaError(f"Unexpected character {ch!r} in generator row", lineno, col)
        if width is not None and len(row) != width:
            raise SchemaError(f"Generator row has length {len(row)}, expected {width}", lineno, 1)
        width = len(row)
        rows.append([int(c) for c in row])
    if not rows:
        raise SchemaError("Code file has no generator rows")
    return _validated(CodeF2, "code", generator=np.asarray(rows, dtype=np.uint8))


def dump_code(code: CodeF2) -> str:
    return "\n".join(code.rows_as_strings()) + "\n"


# Witnesses


def parse_witness(text: str) -> DilationWitness:
    """Witness JSON: isometries V_A, V_B, the aux vector and nu_hat."""
    data = _loads(text, "witness")
    return _validated(
        DilationWitness,
        "witness",
        V_A=parse_matrix(_require(data, "V_A", "Witness"), "V_A"),
        V_B=parse_matrix(_require(data, "V_B", "Witness"), "V_B"),
        aux=parse_matrix(_require(data, "aux", "Witness"), "aux").ravel(),
        nu_hat=np.asarray(_require(data, "nu_hat", "Witness"), dtype=np.float64),
    )


def dump_witness(witness: DilationWitness) -> dict:
    return {
        "V_A": dump_matrix(witness.V_A),
        "V_B": dump_matrix(witness.V_B),
        "aux": dump_matrix(witness.aux),
        "nu_hat": witness.nu_hat.tolist(),
    }


# Reports


def jsonable(obj) -> Any:
    """Plain JSON data from reports, arrays and numpy scalars; complex as [re, im]."""
    if isinstance(obj, BaseModel):
        return jsonable(obj.model_dump())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return dump_matrix(obj)
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _mark_floats(obj) -> Any:
    if isinstance(obj, dict):
        return {k: _mark_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_mark_floats(v) for v in obj]
    if isinstance(obj, float):
        if not np.isfinite(obj):
            return str(obj)
        return _FLOAT_MARK + format(obj, ".17g")
    return obj


def dumps_report(obj) -> str:
    """Sorted-key JSON with every finite float at 17 significant digits.

    Non-finite floats are written as the strings "inf", "-inf" and "nan".
    """
    text = json.dumps(_mark_floats(jsonable(obj)), sort_keys=True, indent=2)
    return _FLOAT_RE.sub(r"\1", text)


def _flatten(obj, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        rows = []
        for k in sorted(obj):
            rows.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else k))
        return rows
    if isinstance(obj, list):
        rows = []
        for i, v in enumerate(obj):
            rows.extend(_flatten(v, f"{prefix}[{i}]"))
        return rows
    return [(prefix, obj)]


def _cell(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else str(v)


def to_csv(obj, table: str | None = None) -> str:
    """CSV of a report.

    Without a table every leaf becomes a key,value row. With a table, the
    named list of records becomes one row per record, its leaves as columns.

    Raises
    ------
    SchemaError
        If the report has no list of records under that name
    """
    data = jsonable(obj)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if table is None:
        writer.writerow(["key", "value"])
        writer.writerows((k, _cell(v)) for k, v in _flatten(data))
        return out.getvalue()

    records = data.get(table) if isinstance(data, dict) else None
    if not isinstance(records, list) or not all(isinstance(r, dict) for r in records):
        raise SchemaError(f"Report has no table named {table!r}")
    rows = [dict(_flatten(r)) for r in records]
    header = sorted({k for r in rows for k in r})
    writer.writerow(header)
    writer.writerows([_cell(r.get(k)) for k in header] for r in rows)
    return out.getvalue()
