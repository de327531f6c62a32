"""Topic filters and matching: '+' spans one level, '#' the remaining tail."""

from dataclasses import dataclass


class InvalidFilter(Exception):
    pass


@dataclass(frozen=True)
class TopicFilter:
    """Validated subscription filter, split on '/'."""

    segments: tuple

    @classmethod
    def parse(cls, text):
        if not text:
            raise InvalidFilter("empty filter")
        segments = text.split("/")
        for i, seg in enumerate(segments):
            if "#" in seg:
                if seg != "#" or i != len(segments) - 1:
                    raise InvalidFilter(f"'#' must be the whole final segment: {text!r}")
            if "+" in seg and seg != "+":
                raise InvalidFilter(f"'+' must occupy a whole segment: {text!r}")
        return cls(segments=tuple(segments))

    def __str__(self):
        return "/".join(self.segments)


def topic_matches(topic_filter, topic):
    """True when `topic` (no wildcards) matches the subscription filter."""
    if isinstance(topic_filter, str):
        topic_filter = TopicFilter.parse(topic_filter)
    fsegs = topic_filter.segments
    tsegs = topic.split("/")
    if fsegs and fsegs[-1] == "#":
        heads = fsegs[:-1]
        if len(tsegs) < len(heads):
            return False
        return all(f == "+" or f == t for f, t in zip(heads, tsegs[:len(heads)]))
    if len(fsegs) != len(tsegs):
        return False
    return all(f == "+" or f == t for f, t in zip(fsegs, tsegs))
