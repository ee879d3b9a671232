"""Scored-event XML annotations (Profusion-style ``ScoredEvent`` elements).

Accepted layout::

    <PSGAnnotation>
      <ScoredEvents>
        <ScoredEvent>
          <Name>Obstructive Apnea</Name>
          <Start>120.0</Start>
          <Duration>15.5</Duration>
        </ScoredEvent>
        ...

``EventConcept`` is accepted in place of ``Name`` (NSRR exports use it). With
``tolerant=True`` the three values may also be given as attributes of the
``ScoredEvent`` element.
"""

from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field

from .errors import InvalidEventTime, MalformedXml, MissingField, NegativeDuration


class EventKind(enum.Enum):
    APNEA = "Apnea"
    HYPOPNEA = "Hypopnea"
    OTHER = "Other"


@dataclass(frozen=True)
class ScoredEvent:
    kind: EventKind
    start_s: float
    duration_s: float
    raw_name: str = ""

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


@dataclass
class Annotations:
    """Apnea/hypopnea events of one recording plus a tally of what was skipped."""

    events: list[ScoredEvent]
    skipped: int = 0
    skipped_names: Counter = field(default_factory=Counter)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def counts(self) -> tuple[int, int]:
        n_apnea = sum(e.kind is EventKind.APNEA for e in self.events)
        return n_apnea, len(self.events) - n_apnea


def classify_event_name(name: str) -> EventKind:
    lowered = name.casefold()
    if "hypopnea" in lowered:
        return EventKind.HYPOPNEA
    if "apnea" in lowered:
        return EventKind.APNEA
    return EventKind.OTHER


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _child_text(elem: ET.Element, names: tuple[str, ...]) -> str | None:
    for child in elem:
        if _local(child.tag) in names and child.text is not None and child.text.strip():
            return child.text.strip()
    return None


def _field(elem: ET.Element, names: tuple[str, ...], tolerant: bool) -> str | None:
    value = _child_text(elem, names)
    if value is None and tolerant:
        for name in names:
            if elem.get(name, "").strip():
                return elem.get(name).strip()
    return value


def _number(text: str | None, what: str, index: int) -> float:
    if text is None:
        raise MissingField(f"ScoredEvent #{index} has no {what}")
    try:
        return float(text)
    except ValueError:
        raise MissingField(f"ScoredEvent #{index}: {what} {text!r} is not a number") from None


def parse_annotations(xml_text: str | bytes, *, tolerant: bool = False) -> Annotations:
    """Apnea and hypopnea events sorted by onset (stable for equal onsets)."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise MalformedXml(str(exc)) from exc

    events = []
    skipped: Counter = Counter()
    for index, elem in enumerate(e for e in root.iter() if _local(e.tag) == "ScoredEvent"):
        name = _field(elem, ("Name", "EventConcept"), tolerant)
        if name is None:
            raise MissingField(f"ScoredEvent #{index} has no Name")
        kind = classify_event_name(name)
        if kind is EventKind.OTHER:
            skipped[name] += 1
            continue
        start = _number(_field(elem, ("Start",), tolerant), "Start", index)
        duration = _number(_field(elem, ("Duration",), tolerant), "Duration", index)
        if duration <= 0:
            raise NegativeDuration(f"ScoredEvent #{index} ({name}) has duration {duration}")
        if start < 0:
            raise InvalidEventTime(f"ScoredEvent #{index} ({name}) starts at {start}")
        events.append(ScoredEvent(kind, start, duration, name))

    events.sort(key=lambda e: e.start_s)
    return Annotations(events, sum(skipped.values()), skipped)


def read_annotations(path, *, tolerant: bool = False) -> Annotations:
    with open(path, "rb") as fh:
        return parse_annotations(fh.read(), tolerant=tolerant)


def events_to_xml(events, *, software: str = "sahs") -> str:
    """Serialise events in the accepted layout; the inverse of :func:`parse_annotations`."""
    root = ET.Element("PSGAnnotation")
    ET.SubElement(root, "SoftwareVersion").text = software
    ET.SubElement(root, "EpochLength").text = "30"
    container = ET.SubElement(root, "ScoredEvents")
    for ev in events:
        node = ET.SubElement(container, "ScoredEvent")
        ET.SubElement(node, "Name").text = ev.raw_name or ev.kind.value
        ET.SubElement(node, "Start").text = repr(float(ev.start_s))
        ET.SubElement(node, "Duration").text = repr(float(ev.duration_s))
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
