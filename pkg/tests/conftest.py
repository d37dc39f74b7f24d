import pytest

from pagelookup import BBox, ByteTokenizer, Label, Page, Span


@pytest.fixture
def byte_tok():
    return ByteTokenizer()


def make_span(span_id, text, order=None, y=300.0, label=Label.KEEP, x0=72.0, x1=540.0, height=12.0):
    return Span(
        id=span_id,
        text=text,
        bbox=BBox(x0, y, x1, y + height),
        order=span_id if order is None else order,
        gold_label=label,
    )


def make_page(spans, page_id="p0", width=612.0, height=792.0, reference=None):
    return Page(page_id=page_id, width=width, height=height, spans=spans, reference_markdown=reference)


@pytest.fixture
def span_factory():
    return make_span


@pytest.fixture
def page_factory():
    return make_page
