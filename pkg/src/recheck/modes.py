"""Access/usage modes, their composition, and mode environments."""
from __future__ import annotations

from enum import IntEnum
from typing import Dict, Hashable, Iterable, Mapping, TypeVar

K = TypeVar("K", bound=Hashable)


class Mode(IntEnum):
    """Usage modes, ordered from least to most demanding."""

    IGNORE = 0
    DELAY = 1
    GUARD = 2
    RETURN = 3
    DEREFERENCE = 4

    def __str__(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls[text.upper()]
        except KeyError:
            raise ValueError(f"unknown mode {text!r}") from None


I, D, G, R, X = Mode.IGNORE, Mode.DELAY, Mode.GUARD, Mode.RETURN, Mode.DEREFERENCE

# COMPOSE_TABLE[outer][inner]
COMPOSE_TABLE = (
    (I, I, I, I, I),
    (I, D, D, D, D),
    (I, D, G, G, X),
    (I, D, G, R, X),
    (I, X, X, X, X),
)


def mode_le(a: Mode, b: Mode) -> bool:
    return a <= b


def compose(outer: Mode, inner: Mode) -> Mode:
    """Mode of a hole reached through an ``outer`` context then an ``inner`` one."""
    return COMPOSE_TABLE[outer][inner]


def compose_by_rules(outer: Mode, inner: Mode) -> Mode:
    """The equational presentation of :func:`compose`; kept for cross-checking the table."""
    if outer is I or inner is I:
        return I
    if outer is D:
        return D
    if outer is G:
        return G if inner is R else inner
    if outer is R:
        return inner
    return X


ModeEnv = Dict[K, Mode]


def env_get(env: Mapping[K, Mode], key: K) -> Mode:
    return env.get(key, I)


def env_join(*envs: Mapping[K, Mode]) -> Dict[K, Mode]:
    """Pointwise maximum of environments."""
    out: Dict[K, Mode] = {}
    for env in envs:
        for k, m in env.items():
            if m is not I and m > out.get(k, I):
                out[k] = m
    return out


def env_compose(m: Mode, env: Mapping[K, Mode]) -> Dict[K, Mode]:
    out = {}
    for k, mk in env.items():
        c = COMPOSE_TABLE[m][mk]
        if c is not I:
            out[k] = c
    return out


def env_le(g1: Mapping[K, Mode], g2: Mapping[K, Mode]) -> bool:
    return all(m <= g2.get(k, I) for k, m in g1.items())


def env_min(envs: Iterable[Mapping[K, Mode]]) -> Dict[K, Mode]:
    """Pointwise minimum of a non-empty family of environments."""
    envs = list(envs)
    if not envs:
        raise ValueError("env_min of an empty family")
    keys = set().union(*envs)
    out = {}
    for k in keys:
        m = min(e.get(k, I) for e in envs)
        if m is not I:
            out[k] = m
    return out


def canonical(env: Mapping[K, Mode]) -> Dict[K, Mode]:
    """Drop ``Ignore`` entries so that structural and semantic equality agree."""
    return {k: Mode(m) for k, m in env.items() if m is not I}
