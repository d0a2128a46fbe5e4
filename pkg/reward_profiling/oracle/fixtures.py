"""Plain-text tabular models.

One directive per line, ``#`` starts a comment::

    states 3
    actions 2
    gamma 0.9
    rho 1 0 0
    reward_bounds 0 1
    P 0 1 : 0 1 0
    r 2 1 : 1.0

``P s a`` lines give the next-state distribution; pairs without an ``r``
line pay zero. ``reward_bounds`` is optional.
"""
import numpy as np

from reward_profiling.oracle.tabular import TabularModel
from reward_profiling.utils.errors import DomainError, ResultsIOError

HEADER_KEYS = ("states", "actions", "gamma", "rho")


def _index_pair(tokens, line_no):
    if len(tokens) != 2:
        raise DomainError(f"line {line_no}: expected '<state> <action> :'")
    return int(tokens[0]), int(tokens[1])


def parse_tabular_model(text):
    header = {}
    transitions, rewards = [], []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        try:
            if key in ("P", "r"):
                left, sep, right = rest.partition(":")
                if not sep:
                    raise DomainError(f"line {line_no}: missing ':' in {key} entry")
                s, a = _index_pair(left.split(), line_no)
                values = [float(v) for v in right.split()]
                (transitions if key == "P" else rewards).append((s, a, values, line_no))
            elif key in ("states", "actions"):
                header[key] = int(rest)
            elif key == "gamma":
                header[key] = float(rest)
            elif key in ("rho", "reward_bounds"):
                header[key] = [float(v) for v in rest.split()]
            else:
                raise DomainError(f"line {line_no}: unknown directive {key!r}")
        except ValueError as e:
            if isinstance(e, DomainError):
                raise
            raise DomainError(f"line {line_no}: {e}") from e

    missing = [key for key in HEADER_KEYS if key not in header]
    if missing:
        raise DomainError(f"tabular fixture is missing {', '.join(missing)}")
    S, A = header["states"], header["actions"]
    P = np.zeros((S, A, S))
    r = np.zeros((S, A))
    seen = set()
    for s, a, probs, line_no in transitions:
        if not (0 <= s < S and 0 <= a < A) or len(probs) != S:
            raise DomainError(f"line {line_no}: transition entry does not fit {S} states x {A} actions")
        P[s, a] = probs
        seen.add((s, a))
    if len(seen) != S * A:
        raise DomainError(f"tabular fixture defines {len(seen)} of {S * A} transition rows")
    for s, a, value, line_no in rewards:
        if not (0 <= s < S and 0 <= a < A) or len(value) != 1:
            raise DomainError(f"line {line_no}: reward entry does not fit {S} states x {A} actions")
        r[s, a] = value[0]
    bounds = header.get("reward_bounds")
    if bounds is not None and len(bounds) != 2:
        raise DomainError("reward_bounds needs exactly two values")
    return TabularModel(P=P, r=r, gamma=header["gamma"], rho=header["rho"],
                        reward_bounds=tuple(bounds) if bounds is not None else None)


def load_tabular_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ResultsIOError(f"Failed to read tabular model from {path}. {e}") from e
    return parse_tabular_model(text)


def format_tabular_model(model):
    lines = [f"states {model.n_states}", f"actions {model.n_actions}", f"gamma {model.gamma!r}",
             "rho " + " ".join(repr(float(p)) for p in model.rho)]
    if model.reward_bounds is not None:
        lines.append("reward_bounds " + " ".join(repr(float(b)) for b in model.reward_bounds))
    for s in range(model.n_states):
        for a in range(model.n_actions):
            lines.append(f"P {s} {a} : " + " ".join(repr(float(p)) for p in model.P[s, a]))
    for s in range(model.n_states):
        for a in range(model.n_actions):
            if model.r[s, a] != 0.0:
                lines.append(f"r {s} {a} : {float(model.r[s, a])!r}")
    return "\n".join(lines) + "\n"


def dump_tabular_model(model, path):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(format_tabular_model(model))
    except OSError as e:
        raise ResultsIOError(f"Failed to write tabular model to {path}. {e}") from e
