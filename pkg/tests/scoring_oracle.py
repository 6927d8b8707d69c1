"""Brute-force tennis rules oracle used to cross-check the scoring module.

Deliberately written as a separate, dict-based implementation: raw point
tallies, explicit rule branches, no shared code with the package. Keep it
dumb and readable.
"""


def oracle_new_match(players=("p1", "p2"), server="p1", best_of=5, final_set_rule="tiebreak_at_6"):
    return {
        "players": list(players),
        "raw_points": {p: 0 for p in players},
        "games": {p: 0 for p in players},
        "sets": {p: 0 for p in players},
        "tb": None,            # {player: points} during a tiebreak
        "tb_first": None,      # who served the first tiebreak point
        "server": server,
        "best_of": best_of,
        "final_set_rule": final_set_rule,
        "winner": None,
    }


def _other(state, player):
    a, b = state["players"]
    return b if player == a else a


def _tb_trigger(state):
    deciding = sum(state["sets"].values()) == state["best_of"] - 1
    if deciding and state["final_set_rule"] == "tiebreak_at_12":
        return 12
    return 6


def _finish_game(state, game_winner, via_tiebreak):
    state["games"][game_winner] += 1
    state["raw_points"] = {p: 0 for p in state["players"]}
    loser = _other(state, game_winner)

    if via_tiebreak:
        next_server = _other(state, state["tb_first"])
    else:
        next_server = _other(state, state["server"])
    state["server"] = next_server
    state["tb"] = None
    state["tb_first"] = None

    gw, gl = state["games"][game_winner], state["games"][loser]
    trigger = _tb_trigger(state)
    set_over = (gw >= 6 and gw - gl >= 2) or (gw == trigger + 1 and gl == trigger)
    if set_over:
        state["sets"][game_winner] += 1
        state["games"] = {p: 0 for p in state["players"]}
        if state["sets"][game_winner] == state["best_of"] // 2 + 1:
            state["winner"] = game_winner
    elif state["games"][game_winner] == trigger and state["games"][loser] == trigger:
        state["tb"] = {p: 0 for p in state["players"]}
        state["tb_first"] = state["server"]


def oracle_advance(state, point_winner):
    assert state["winner"] is None
    assert point_winner in state["players"]

    if state["tb"] is not None:
        state["tb"][point_winner] += 1
        w = state["tb"][point_winner]
        l = state["tb"][_other(state, point_winner)]
        if w >= 7 and w - l >= 2:
            _finish_game(state, point_winner, via_tiebreak=True)
        else:
            played = w + l
            # opener serves point 1, then pairs alternate
            if played == 0:
                state["server"] = state["tb_first"]
            else:
                block = (played + 1) // 2
                if block % 2 == 0:
                    state["server"] = state["tb_first"]
                else:
                    state["server"] = _other(state, state["tb_first"])
        return state

    state["raw_points"][point_winner] += 1
    w = state["raw_points"][point_winner]
    l = state["raw_points"][_other(state, point_winner)]
    if w >= 4 and w - l >= 2:
        _finish_game(state, point_winner, via_tiebreak=False)
    return state


def _point_label(raw_w, raw_l):
    names = ["0", "15", "30", "40"]
    if raw_w >= 3 and raw_l >= 3:
        if raw_w == raw_l:
            return "40"
        if raw_w > raw_l:
            return "Adv"
        return "40"
    return names[raw_w]


def oracle_snapshot(state):
    """Canonical comparable projection of an oracle state."""
    a, b = state["players"]
    tb = None
    if state["tb"] is not None:
        tb = (state["tb"][a], state["tb"][b])
    return {
        "points": (_point_label(state["raw_points"][a], state["raw_points"][b]),
                   _point_label(state["raw_points"][b], state["raw_points"][a])),
        "games": (state["games"][a], state["games"][b]),
        "sets": (state["sets"][a], state["sets"][b]),
        "tiebreak": tb,
        "server": state["server"],
        "winner": state["winner"],
    }


def copy_state(state):
    out = dict(state)
    for key in ("players",):
        out[key] = list(state[key])
    for key in ("raw_points", "games", "sets"):
        out[key] = dict(state[key])
    if state["tb"] is not None:
        out["tb"] = dict(state["tb"])
    return out


def oracle_labels(state):
    """One-step lookahead over the oracle itself."""
    labels = set()
    if state["winner"] is not None:
        return labels
    for p in state["players"]:
        nxt = oracle_advance(copy_state(state), p)
        won_set = nxt["sets"][p] == state["sets"][p] + 1
        won_game = won_set or nxt["games"][p] == state["games"][p] + 1
        if won_game:
            labels.add("GamePoint")
            if p != state["server"]:
                labels.add("BreakPoint")
        if won_set:
            labels.add("SetPoint")
        if nxt["winner"] == p:
            labels.add("MatchPoint")
    return labels
