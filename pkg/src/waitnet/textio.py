"""Line-oriented textual net format: parser and emitters.

Grammar, one declaration per line, ``#`` starts a comment::

    net <id>
    place <id> [init <nat>]
    ctrl <id> [init <nat>]
    trans <id> [label <sym>|eps] interval [<rat>,<rat>|inf]
    arc <place> -> <trans> [weight <nat>]
    arc <trans> -> <place> [weight <nat>]

Rationals are written ``a`` or ``a/b``; ``inf`` is a keyword, never a
numeral.  A transition's label defaults to its identifier; arc weights
default to 1.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .constraints import INF, bound_str, is_finite
from .errors import ModelError, NetSemanticError, NetSyntaxError
from .model import EPSILON, WaitingNet, make_net

_RAT = re.compile(r"^-?\d+(/\d+)?$")
_INTERVAL = re.compile(r"^\[\s*([^,\s\]]+)\s*,\s*([^,\s\]]+)\s*\]$")
_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_.-]*$")


def _parse_rational(token: str, line: int, col: int) -> Fraction:
    if not _RAT.match(token):
        raise NetSyntaxError(line, col, f"expected a rational, got {token!r}")
    value = Fraction(token)
    if value < 0:
        raise NetSyntaxError(line, col, "interval bounds must be non-negative")
    return value


def parse_net(text: str, name_hint: str = "net") -> WaitingNet:
    """Parse net source text; raises NetSyntaxError / NetSemanticError."""
    net_name = None
    places: list[tuple[str, int]] = []
    ctrls: list[tuple[str, int]] = []
    transitions: list[tuple] = []
    arcs: list[tuple] = []
    declared: dict[str, tuple[str, int]] = {}  # id -> (kind, line)

    def declare(kind: str, ident: str, line: int, col: int):
        if not _ID.match(ident):
            raise NetSyntaxError(line, col, f"bad identifier {ident!r}")
        if ident in declared:
            prev_kind, prev_line = declared[ident]
            raise NetSemanticError(
                line, f"{ident!r} already declared as {prev_kind} on line {prev_line}"
            )
        declared[ident] = (kind, line)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        cols = _token_columns(line, tokens)
        head = tokens[0]
        if head == "net":
            if len(tokens) != 2:
                raise NetSyntaxError(lineno, cols[0], "usage: net <id>")
            if net_name is not None:
                raise NetSemanticError(lineno, "duplicate net declaration")
            net_name = tokens[1]
        elif head in ("place", "ctrl"):
            if len(tokens) not in (2, 4) or (len(tokens) == 4 and tokens[2] != "init"):
                raise NetSyntaxError(lineno, cols[0], f"usage: {head} <id> [init <nat>]")
            ident = tokens[1]
            declare("control place" if head == "ctrl" else "place", ident, lineno, cols[1])
            init = 0
            if len(tokens) == 4:
                if not tokens[3].isdigit():
                    raise NetSyntaxError(lineno, cols[3], "init count must be a natural")
                init = int(tokens[3])
            (ctrls if head == "ctrl" else places).append((ident, init))
        elif head == "trans":
            _parse_trans(tokens, cols, lineno, declare, transitions)
        elif head == "arc":
            _parse_arc(tokens, cols, lineno, arcs)
        else:
            raise NetSyntaxError(lineno, cols[0], f"unknown declaration {head!r}")

    if net_name is None:
        net_name = name_hint
    place_ids = {p for p, _ in places} | {c for c, _ in ctrls}
    tids = {t[0] for t in transitions}
    for src, dst, _, lineno in arcs:
        for endpoint in (src, dst):
            if endpoint not in place_ids and endpoint not in tids:
                raise NetSemanticError(lineno, f"unknown identifier {endpoint!r} in arc")
        if (src in place_ids) == (dst in place_ids):
            raise NetSemanticError(
                lineno, f"arc {src!r} -> {dst!r} must join a place and a transition"
            )
    initial = {p: n for p, n in places + ctrls if n}
    try:
        return make_net(
            net_name,
            [p for p, _ in places],
            [c for c, _ in ctrls],
            transitions,
            [(src, dst, w) for src, dst, w, _ in arcs],
            initial,
        )
    except ModelError as exc:
        raise NetSemanticError(0, str(exc)) from exc


def _parse_trans(tokens, cols, lineno, declare, transitions):
    ident = tokens[1] if len(tokens) > 1 else None
    if ident is None:
        raise NetSyntaxError(lineno, cols[0], "usage: trans <id> [label <sym>] interval [lo,hi]")
    declare("transition", ident, lineno, cols[1])
    label = ident
    rest = tokens[2:]
    rest_cols = cols[2:]
    if rest and rest[0] == "label":
        if len(rest) < 2:
            raise NetSyntaxError(lineno, rest_cols[0], "label needs a symbol")
        label = EPSILON if rest[1] == "eps" else rest[1]
        rest = rest[2:]
        rest_cols = rest_cols[2:]
    if not rest or rest[0] != "interval":
        raise NetSyntaxError(lineno, cols[0], "transition needs an interval clause")
    spec = "".join(rest[1:])
    col = rest_cols[1] if len(rest_cols) > 1 else rest_cols[0]
    match = _INTERVAL.match(spec)
    if not match:
        raise NetSyntaxError(lineno, col, f"bad interval {spec!r}, expected [lo,hi]")
    lo = _parse_rational(match.group(1), lineno, col)
    hi_token = match.group(2)
    hi = INF if hi_token == "inf" else _parse_rational(hi_token, lineno, col)
    if is_finite(hi) and hi < lo:
        raise NetSemanticError(lineno, f"{ident!r}: interval [{lo},{hi}] is empty")
    transitions.append((ident, label, lo, hi))


def _parse_arc(tokens, cols, lineno, arcs):
    if len(tokens) not in (4, 6) or tokens[2] != "->" or (
        len(tokens) == 6 and tokens[4] != "weight"
    ):
        raise NetSyntaxError(lineno, cols[0], "usage: arc <src> -> <dst> [weight <nat>]")
    weight = 1
    if len(tokens) == 6:
        if not tokens[5].isdigit() or int(tokens[5]) == 0:
            raise NetSyntaxError(lineno, cols[5], "weight must be a positive natural")
        weight = int(tokens[5])
    arcs.append((tokens[1], tokens[3], weight, lineno))


def _token_columns(line: str, tokens) -> list[int]:
    cols = []
    search_from = 0
    for token in tokens:
        idx = line.index(token, search_from)
        cols.append(idx + 1)
        search_from = idx + len(token)
    return cols


def parse_net_file(path: str) -> WaitingNet:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    hint = re.sub(r"\.wnet$", "", path.rsplit("/", 1)[-1])
    return parse_net(text, name_hint=hint)


def print_net(net: WaitingNet) -> str:
    """Emit source text that parses back to a structurally equal net."""
    lines = [f"net {net.name}"]
    init = net.marking_tokens(net.initial_marking)
    for p in net.standard_places:
        lines.append(f"place {p} init {init[p]}" if init[p] else f"place {p}")
    for c in net.control_places:
        lines.append(f"ctrl {c} init {init[c]}" if init[c] else f"ctrl {c}")
    for t in net.transitions:
        label = "eps" if t.label is EPSILON else t.label
        label_clause = "" if label == t.tid else f" label {label}"
        lines.append(f"trans {t.tid}{label_clause} interval [{t.lo},{bound_str(t.hi)}]")
    for t in net.transitions:
        for place in sorted(net.pre[t.tid]):
            weight = net.pre[t.tid][place]
            suffix = f" weight {weight}" if weight != 1 else ""
            lines.append(f"arc {place} -> {t.tid}{suffix}")
    for t in net.transitions:
        for place in sorted(net.post[t.tid]):
            weight = net.post[t.tid][place]
            suffix = f" weight {weight}" if weight != 1 else ""
            lines.append(f"arc {t.tid} -> {place}{suffix}")
    return "\n".join(lines) + "\n"


def emit_dot(graph) -> str:
    """DOT text for a state class graph or a timed automaton."""
    from . import scta as _scta
    from . import stateclass as _stateclass

    if isinstance(graph, _stateclass.StateClassGraph):
        return _stateclass.scg_dot(graph)
    if isinstance(graph, _scta.TimedAutomaton):
        return _scta.ta_dot(graph)
    raise TypeError(f"cannot render {type(graph).__name__} as DOT")
