from __future__ import annotations

from pathlib import Path

import pytest

from policylens import parse_policy

POLICY_DIR = Path(__file__).resolve().parent.parent / "policies"

MUSIC_POLICY = POLICY_DIR / "music_public_read.json"
DENY_ALL_POLICY = POLICY_DIR / "deny_all.json"
ALLOW_ALL_POLICY = POLICY_DIR / "allow_all.json"

MUSIC_REGEX = r"(mp3s/A1/.*\.mp3)|(lyrics/A1/.*\.txt)"


def corpus_paths() -> list[Path]:
    return sorted(POLICY_DIR.glob("*.json"))


@pytest.fixture(scope="session")
def corpus():
    return {p.name: parse_policy(p.read_text()) for p in corpus_paths()}


@pytest.fixture(scope="session")
def music_doc():
    return parse_policy(MUSIC_POLICY.read_text())


@pytest.fixture(scope="session")
def deny_all_doc():
    return parse_policy(DENY_ALL_POLICY.read_text())
