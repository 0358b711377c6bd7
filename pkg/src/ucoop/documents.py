"""JSON game documents and result serialization.

A game document looks like::

    {
      "version": 1,
      "players": 4,                       # or ["ann", "bob", ...]
      "mode": "full",                     # or "restricted"
      "coalitions": [{"members": [1, 2], "value": "6"}, ...],
      "utility": {"kind": "percapita"}
    }

With a player count, members are 1-based indices; with names, members are
names. Values are integers or ``"p/q"`` strings. An ``"assignment"`` object
with a ``"profits"`` matrix replaces ``players``/``coalitions``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .assignment import AssignmentSpec, build_game
from .game import Game, coalition_key, mask_of, members, to_fraction
from .core import least_core_shift
from .utility import (GeneralUtility, UtilityFamily, arctan_utility, identity, percapita, q_weighted,
                      reciprocal_percapita, shift)

SCHEMA_VERSION = 1


class DocumentError(ValueError):
    pass


@dataclass(frozen=True)
class GameDocument:
    game: Game
    utility: UtilityFamily | None
    utility_spec: Any = None
    assignment: AssignmentSpec | None = None
    by_name: bool = False


def _rational(value, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: {exc}") from None


def _player_index(ref, names: tuple, by_name: bool) -> int:
    if by_name:
        if not isinstance(ref, str) or ref not in names:
            raise DocumentError(f"unknown player {ref!r}")
        return names.index(ref)
    if isinstance(ref, bool) or not isinstance(ref, int) or not 1 <= ref <= len(names):
        raise DocumentError(f"player reference {ref!r} must be an integer in 1..{len(names)}")
    return ref - 1


def parse_coalition(refs, names: tuple, by_name: bool) -> int:
    if not isinstance(refs, list):
        raise DocumentError("coalition members must be a list")
    idx = [_player_index(r, names, by_name) for r in refs]
    if len(set(idx)) != len(idx):
        raise DocumentError(f"duplicate members in {refs!r}")
    return mask_of(idx)


def _general(name: str) -> GeneralUtility:
    if name == "arctan":
        return arctan_utility()
    if name == "tanh":
        return GeneralUtility(lambda s, t: math.tanh(t), lambda s, y: math.atanh(y), -1.0, 1.0, "tanh")
    if name == "exp":
        return GeneralUtility(lambda s, t: math.exp(t), lambda s, y: math.log(y), 0.0, math.inf, "exp")
    if name == "neg-exp":
        return GeneralUtility(lambda s, t: -math.exp(-t), lambda s, y: -math.log(-y), -math.inf, 0.0, "neg-exp")
    raise DocumentError(f"unknown general utility {name!r}; known: arctan, tanh, exp, neg-exp")


def parse_utility(spec, names: tuple = (), by_name: bool = False, game: Game | None = None) -> UtilityFamily:
    """Build a utility family from its JSON description (or a bare kind string)."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise DocumentError("utility must be an object with a 'kind'")
    kind = spec["kind"]
    if kind == "identity":
        return identity()
    if kind == "percapita":
        return percapita()
    if kind == "reciprocal-percapita":
        return reciprocal_percapita()
    if kind == "shift":
        if "c" not in spec:
            raise DocumentError("shift utility needs 'c'")
        return shift(_rational(spec["c"], "utility c"))
    if kind == "least-core-shift":
        if game is None:
            raise DocumentError("least-core-shift needs a game")
        return least_core_shift(game)
    if kind == "q-weighted":
        raw = spec.get("weights")
        if not isinstance(raw, list):
            raise DocumentError("q-weighted utility needs a 'weights' list of {members, weight}")
        weights = {}
        for item in raw:
            s = parse_coalition(item.get("members"), names, by_name)
            weights[s] = _rational(item.get("weight"), "weight")
        try:
            return q_weighted(weights)
        except ValueError as exc:
            raise DocumentError(str(exc)) from None
    if kind == "general":
        return _general(spec.get("name", ""))
    raise DocumentError(f"unknown utility kind {kind!r}")


def parse_document(data: dict) -> GameDocument:
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema version {version!r}")
    assignment = None
    if "assignment" in data:
        profits = data["assignment"].get("profits") if isinstance(data["assignment"], dict) else None
        if not isinstance(profits, list) or not all(isinstance(r, list) for r in profits):
            raise DocumentError("assignment needs a 'profits' matrix")
        try:
            assignment = AssignmentSpec(tuple(tuple(_rational(v, "profit") for v in row) for row in profits))
            game = build_game(assignment)
        except ValueError as exc:
            raise DocumentError(str(exc)) from None
        names, by_name = game.names, True
    else:
        players = data.get("players")
        if isinstance(players, list):
            names = tuple(str(p) for p in players)
            if len(set(names)) != len(names) or not all(isinstance(p, str) for p in players):
                raise DocumentError("player names must be distinct strings")
            by_name = True
        elif isinstance(players, int) and not isinstance(players, bool):
            names = tuple(str(i + 1) for i in range(players))
            by_name = False
        else:
            raise DocumentError("'players' must be a count or a list of names")
        mode = data.get("mode", "full")
        if mode not in ("full", "restricted"):
            raise DocumentError(f"mode must be 'full' or 'restricted', not {mode!r}")
        values = {}
        for item in data.get("coalitions", []):
            if not isinstance(item, dict):
                raise DocumentError("each coalition must be an object")
            s = parse_coalition(item.get("members"), names, by_name)
            if s in values:
                raise DocumentError(f"coalition {item.get('members')!r} listed twice")
            values[s] = _rational(item.get("value"), f"value of {item.get('members')!r}")
        try:
            if mode == "full":
                game = Game(len(names), values, None, names)
            else:
                game = Game(len(names), values, tuple(values), names)
        except ValueError as exc:
            raise DocumentError(str(exc)) from None
    spec = data.get("utility")
    fam = parse_utility(spec, names, by_name, game) if spec is not None else None
    return GameDocument(game, fam, spec, assignment, by_name)


def game_document(game: Game, utility_spec=None) -> dict:
    """The JSON document describing ``game``; ``parse_document`` reads it back unchanged."""
    default_names = game.names == tuple(str(i + 1) for i in range(game.n))
    ref = (lambda i: i + 1) if default_names else (lambda i: game.names[i])
    listed = game.nontrivial if game.restricted else [s for s in game.nontrivial if game.value(s) != 0]
    coalitions = [{"members": [ref(i) for i in members(s)], "value": render_value(game.value(s))}
                  for s in [*listed, game.grand]]
    out = {"version": SCHEMA_VERSION, "players": game.n if default_names else list(game.names),
           "mode": "restricted" if game.restricted else "full", "coalitions": coalitions}
    if utility_spec is not None:
        out["utility"] = utility_spec
    return out


def load_document(text: str) -> GameDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return parse_document(data)


def render_value(v) -> str:
    """Rationals as ``"p/q"`` (or ``"p"``); floats by ``repr``."""
    if isinstance(v, float):
        return repr(v)
    return str(Fraction(v))


def render_coalition(game: Game, s: int) -> list:
    return [game.names[i] for i in members(s)]


def render_coalitions(game: Game, coalitions) -> list:
    return [render_coalition(game, s) for s in sorted(coalitions, key=coalition_key)]


def render_point(x) -> list:
    return [render_value(v) for v in x]


def render_weights(game: Game, weights: dict) -> list:
    return [{"members": render_coalition(game, s), "weight": render_value(w)}
            for s, w in sorted(weights.items(), key=lambda p: coalition_key(p[0]))]


def render_rows(game: Game, rows) -> list:
    """Rows over payoff variables whose coefficients are 0/1 become coalition statements."""
    out = []
    for r in rows:
        if all(c in (0, 1) for c in r.coeffs):
            s = sum(1 << i for i, c in enumerate(r.coeffs) if c)
            out.append({"members": render_coalition(game, s), "relation": r.relation, "rhs": render_value(r.rhs)})
        else:
            out.append({"coeffs": render_point(r.coeffs), "relation": r.relation, "rhs": render_value(r.rhs)})
    return out


def dump(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"

