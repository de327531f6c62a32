import pytest

from bitech.bus.topics import InvalidFilter, TopicFilter, topic_matches


def test_single_level_wildcard():
    assert topic_matches("bitech/+/env", "bitech/p1/env")


def test_multi_level_wildcard():
    assert topic_matches("bitech/#", "bitech/ac/energy")


def test_level_count_mismatch():
    assert not topic_matches("bitech/+/env", "bitech/p1/ac/env")


def test_exact_match():
    assert topic_matches("a/b/c", "a/b/c")
    assert not topic_matches("a/b/c", "a/b/d")


def test_hash_matches_parent_level():
    assert topic_matches("bitech/#", "bitech")
    assert topic_matches("#", "anything/at/all")


def test_plus_does_not_span_levels():
    assert not topic_matches("+", "a/b")


def test_invalid_filters():
    for bad in ("a/#/b", "", "a/b#", "a/+b", "#/a"):
        with pytest.raises(InvalidFilter):
            TopicFilter.parse(bad)


def test_parse_preserves_segments():
    assert TopicFilter.parse("bitech/site/+/env").segments == ("bitech", "site", "+", "env")
