"""Surface-form bank for injected turns.

The bank is an editable JSON data file shipped with the package:

    pattern name -> social action -> domain -> [surface variants]

The domain key "*" is the fallback used when a domain has no dedicated
list. Variant 0 of each action is the canonical wording; substitution
slots appear as "{name}".
"""

from __future__ import annotations

import json
from importlib import resources


class PhraseBankError(KeyError):
    """Missing phrase bank entry."""


_BANK: dict | None = None


def load_bank(path: str | None = None) -> dict:
    """Load the phrase bank, from `path` or from the packaged default."""
    global _BANK
    if path is not None:
        with open(path, "rb") as f:
            return json.load(f)
    if _BANK is None:
        data = resources.files("natvar").joinpath("data/phrase_bank.json").read_bytes()
        _BANK = json.loads(data)
    return _BANK


def variants(pattern: str, action: str, domain: str, bank: dict | None = None) -> list[str]:
    """Surface variants for (pattern, action, domain); raises if absent."""
    bank = bank if bank is not None else load_bank()
    try:
        per_domain = bank[pattern][action]
    except KeyError as e:
        raise PhraseBankError(f"no phrase bank entry for ({pattern}, {action})") from e
    forms = per_domain.get(domain, per_domain.get("*"))
    if not forms:
        raise PhraseBankError(f"no phrase bank entry for ({pattern}, {action}, {domain})")
    return list(forms)
