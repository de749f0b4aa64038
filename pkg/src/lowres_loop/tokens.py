"""Reserved control tokens shared by the corpus, lexicon and backend layers.

Placeholders (``__NE0``, ``__NE1``, ...) stand in for named entities, label
tokens (``__opt_src_xx``, ``__opt_tgt_yy``) steer the translation direction,
and the null/unk sentinels are internal to the lexical backend.  None of them
may appear as ordinary corpus tokens.
"""

import re

NULL_SOURCE = "__null_src__"
NULL_TARGET = "__null_tgt__"
UNK = "__unk__"

SOURCE_LABEL_PREFIX = "__opt_src_"
TARGET_LABEL_PREFIX = "__opt_tgt_"
_LABEL_PREFIX = "__opt_"

_PLACEHOLDER_RE = re.compile(r"__NE(\d+)")
_SENTINELS = frozenset({NULL_SOURCE, NULL_TARGET, UNK})


def placeholder(ordinal: int) -> str:
    return f"__NE{ordinal}"


def placeholder_ordinal(token: str) -> int | None:
    """Ordinal of a placeholder token, or None for any other token."""
    match = _PLACEHOLDER_RE.fullmatch(token)
    return int(match.group(1)) if match else None


def is_placeholder(token: str) -> bool:
    return _PLACEHOLDER_RE.fullmatch(token) is not None


def is_label(token: str) -> bool:
    return token.startswith(_LABEL_PREFIX)


def source_label(language: str) -> str:
    return SOURCE_LABEL_PREFIX + language


def target_label(language: str) -> str:
    return TARGET_LABEL_PREFIX + language


def is_reserved(token: str) -> bool:
    """True for tokens that plain corpus text is not allowed to contain."""
    return is_placeholder(token) or is_label(token) or token in _SENTINELS
