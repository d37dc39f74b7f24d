#!/usr/bin/env python3
"""Convert a text PDF into span-level page JSON for the pagelookup engine.

Emits one file per page, `<stem>_p<idx>.json`, conforming to the page
schema (span text, bounding boxes in points with top-left origin, reading
order; gold_label and reference_markdown left null). Reading order follows
the content-stream order, which simple generators preserve.

No PDF library is required: this is a minimal, self-contained parser for
classic single-xref text PDFs (uncompressed object tables, Flate and/or
ASCII85 content filters, standard-14 fonts), i.e. the kind produced by
reportlab and similar generators. Scanned pages, embedded fonts, and
cross-reference streams are out of scope. Font metrics for bbox widths
come from reportlab's bundled standard-14 tables.

Usage: extract.py <pdf> <out_dir> [--pages a-b]
Exit codes: 0 ok, 1 usage error, 2 unreadable/encrypted/unsupported PDF.
"""

from __future__ import annotations

import argparse
import base64
import json
import re
import sys
import zlib
from dataclasses import dataclass
from pathlib import Path

from reportlab.pdfbase import pdfmetrics

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

WHITESPACE = b"\x00\t\n\x0c\r "
DELIMITERS = b"()<>[]{}/%"

STRING_ESCAPES = {
    ord("n"): ord("\n"), ord("r"): ord("\r"), ord("t"): ord("\t"),
    ord("b"): ord("\b"), ord("f"): ord("\f"),
    ord("("): ord("("), ord(")"): ord(")"), ord("\\"): ord("\\"),
}


class PdfError(Exception):
    pass


def parse_objects(data: bytes) -> dict[int, bytes]:
    objects: dict[int, bytes] = {}
    for match in re.finditer(rb"(\d+)\s+\d+\s+obj\b(.*?)\bendobj", data, re.S):
        objects[int(match.group(1))] = match.group(2)
    if not objects:
        raise PdfError("no PDF objects found (not a PDF, or an unsupported flavor)")
    return objects


def find_trailer(data: bytes) -> bytes:
    trailers = list(re.finditer(rb"\btrailer\b(.*?)\bstartxref\b", data, re.S))
    if not trailers:
        raise PdfError("no trailer found (cross-reference streams are not supported)")
    return trailers[-1].group(1)


def get_ref(body: bytes, name: bytes) -> int | None:
    match = re.search(rb"/" + name + rb"\s+(\d+)\s+\d+\s+R", body)
    return int(match.group(1)) if match else None


def get_numbers(body: bytes, name: bytes) -> list[float] | None:
    match = re.search(rb"/" + name + rb"\s*\[([^\]]*)\]", body)
    if not match:
        return None
    return [float(v) for v in re.findall(rb"[-+]?\d*\.?\d+", match.group(1))]


def walk_pages(objects: dict[int, bytes], node_ref: int, inherited: dict) -> list[dict]:
    """Depth-first /Kids walk, carrying inheritable attributes down."""
    body = objects.get(node_ref)
    if body is None:
        raise PdfError(f"missing object {node_ref} in page tree")
    attrs = dict(inherited)
    media = get_numbers(body, b"MediaBox")
    if media:
        attrs["media_box"] = media
    font_obj = _font_dict_source(objects, body)
    if font_obj is not None:
        attrs["fonts"] = font_obj
    if re.search(rb"/Type\s*/Pages\b", body):
        kids_match = re.search(rb"/Kids\s*\[([^\]]*)\]", body)
        if not kids_match:
            raise PdfError(f"pages node {node_ref} has no /Kids")
        kid_refs = [int(r) for r in re.findall(rb"(\d+)\s+\d+\s+R", kids_match.group(1))]
        pages = []
        for kid in kid_refs:
            pages.extend(walk_pages(objects, kid, attrs))
        return pages
    attrs["body"] = body
    return [attrs]


def _font_dict_source(objects: dict[int, bytes], body: bytes) -> dict[str, str] | None:
    """Map resource font names (F1) to base font names (Helvetica)."""
    match = re.search(rb"/Font\s*(?:<<(.*?)>>|(\d+)\s+\d+\s+R)", body, re.S)
    if not match:
        return None
    font_body = match.group(1) if match.group(1) is not None else objects.get(int(match.group(2)), b"")
    fonts = {}
    for name, ref in re.findall(rb"/(\w+)\s+(\d+)\s+\d+\s+R", font_body):
        font_obj = objects.get(int(ref), b"")
        base = re.search(rb"/BaseFont\s*/([^\s/<>\[\]]+)", font_obj)
        if base:
            fonts[name.decode("latin-1")] = base.group(1).decode("latin-1")
    return fonts or None


def content_stream(objects: dict[int, bytes], page_body: bytes) -> bytes:
    contents = re.search(rb"/Contents\s*(?:\[([^\]]*)\]|(\d+)\s+\d+\s+R)", page_body)
    if not contents:
        return b""
    if contents.group(1) is not None:
        refs = [int(r) for r in re.findall(rb"(\d+)\s+\d+\s+R", contents.group(1))]
    else:
        refs = [int(contents.group(2))]
    return b"\n".join(decode_stream(objects[r]) for r in refs if r in objects)


def decode_stream(body: bytes) -> bytes:
    match = re.search(rb"stream\r?\n", body)
    if not match:
        return b""
    data = body[match.end():body.rfind(b"endstream")]
    filters = re.findall(rb"/(ASCII85Decode|ASCIIHexDecode|FlateDecode)", body[:match.start()])
    for name in filters:
        if name == b"ASCII85Decode":
            data = base64.a85decode(data.strip(), adobe=True, ignorechars=WHITESPACE)
        elif name == b"ASCIIHexDecode":
            data = bytes.fromhex(data.replace(b">", b"").decode("latin-1").replace("\n", "").replace("\r", " ").replace(" ", ""))
        else:
            data = zlib.decompress(data)
    return data


def tokenize(stream: bytes):
    """Yield ('num'|'str'|'name'|'op'|'[', ...) tokens from a content stream."""
    i, n = 0, len(stream)
    while i < n:
        c = stream[i]
        if c in WHITESPACE:
            i += 1
        elif c == ord("%"):
            i = stream.find(b"\n", i)
            i = n if i < 0 else i + 1
        elif c == ord("("):
            text, i = _literal_string(stream, i)
            yield ("str", text)
        elif stream.startswith(b"<<", i):
            yield ("op", b"<<")
            i += 2
        elif stream.startswith(b">>", i):
            yield ("op", b">>")
            i += 2
        elif c == ord("<"):
            end = stream.find(b">", i)
            end = n if end < 0 else end
            hex_digits = re.sub(rb"\s", b"", stream[i + 1:end])
            if len(hex_digits) % 2:
                hex_digits += b"0"
            yield ("str", bytes.fromhex(hex_digits.decode("latin-1")))
            i = end + 1
        elif c in b"[]":
            yield ("op", stream[i:i + 1])
            i += 1
        elif c == ord("/"):
            j = i + 1
            while j < n and stream[j] not in WHITESPACE and stream[j] not in DELIMITERS:
                j += 1
            yield ("name", stream[i + 1:j].decode("latin-1"))
            i = j
        elif c in b"+-.0123456789":
            j = i + 1
            while j < n and stream[j] in b"+-.0123456789eE":
                j += 1
            try:
                yield ("num", float(stream[i:j]))
            except ValueError:
                pass
            i = j
        else:
            j = i
            while j < n and stream[j] not in WHITESPACE and stream[j] not in DELIMITERS:
                j += 1
            yield ("op", stream[i:j])
            i = j


def _literal_string(stream: bytes, i: int) -> tuple[bytes, int]:
    out = bytearray()
    depth = 1
    i += 1
    n = len(stream)
    while i < n and depth:
        c = stream[i]
        if c == ord("\\") and i + 1 < n:
            nxt = stream[i + 1]
            if nxt in STRING_ESCAPES:
                out.append(STRING_ESCAPES[nxt])
                i += 2
            elif ord("0") <= nxt <= ord("7"):
                j = i + 1
                octal = 0
                while j < n and j < i + 4 and ord("0") <= stream[j] <= ord("7"):
                    octal = octal * 8 + (stream[j] - ord("0"))
                    j += 1
                out.append(octal & 0xFF)
                i = j
            elif nxt in b"\r\n":
                i += 2 if not stream.startswith(b"\r\n", i + 1) else 3
            else:
                out.append(nxt)
                i += 2
        elif c == ord("("):
            depth += 1
            out.append(c)
            i += 1
        elif c == ord(")"):
            depth -= 1
            if depth:
                out.append(c)
            i += 1
        else:
            out.append(c)
            i += 1
    return bytes(out), i


Matrix = tuple[float, float, float, float, float, float]

IDENTITY: Matrix = (1.0, 0.0, 0.0, 1.0, 0.0, 0.0)


def multiply(m1: Matrix, m2: Matrix) -> Matrix:
    a1, b1, c1, d1, e1, f1 = m1
    a2, b2, c2, d2, e2, f2 = m2
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
        e1 * a2 + f1 * c2 + e2,
        e1 * b2 + f1 * d2 + f2,
    )


@dataclass
class TextRun:
    text: str
    x: float
    y: float
    font: str
    size: float
    width: float


def string_width(text: str, font: str, size: float) -> float:
    try:
        return pdfmetrics.stringWidth(text, font, size)
    except KeyError:
        return 0.5 * size * len(text)


def ascent_descent(font: str, size: float) -> tuple[float, float]:
    try:
        ascent, descent = pdfmetrics.getAscentDescent(font, size)
    except KeyError:
        ascent, descent = 0.75 * size, -0.25 * size
    return ascent, descent


def interpret(stream: bytes, fonts: dict[str, str]) -> list[TextRun]:
    """Run the text-positioning subset of the content stream."""
    runs: list[TextRun] = []
    ctm = IDENTITY
    tm = lm = IDENTITY
    font_name = "Helvetica"
    size = 12.0
    leading = 0.0
    stack: list = []

    def show(raw: bytes):
        nonlocal tm
        text = raw.decode("cp1252", "replace")
        if not text:
            return
        trm = multiply(tm, ctm)
        width = string_width(text, font_name, size)
        runs.append(TextRun(text, trm[4], trm[5], font_name, size, width))
        tm = multiply((1, 0, 0, 1, width, 0), tm)

    def newline():
        nonlocal tm, lm
        lm = multiply((1, 0, 0, 1, 0, -leading), lm)
        tm = lm

    operands: list = []
    array_mode: list | None = None
    for kind, value in tokenize(stream):
        if kind == "op" and value == b"[":
            array_mode = []
            continue
        if kind == "op" and value == b"]":
            operands.append(array_mode)
            array_mode = None
            continue
        if array_mode is not None:
            array_mode.append((kind, value))
            continue
        if kind in ("num", "str", "name"):
            operands.append((kind, value))
            continue

        op = value
        if op == b"q":
            stack.append(ctm)
        elif op == b"Q":
            ctm = stack.pop() if stack else IDENTITY
        elif op == b"cm" and len(operands) >= 6:
            ctm = multiply(tuple(v for _, v in operands[-6:]), ctm)
        elif op == b"BT":
            tm = lm = IDENTITY
        elif op == b"Tf" and len(operands) >= 2:
            font_name = fonts.get(operands[-2][1], operands[-2][1])
            size = operands[-1][1]
        elif op == b"TL" and operands:
            leading = operands[-1][1]
        elif op == b"Tm" and len(operands) >= 6:
            tm = lm = tuple(v for _, v in operands[-6:])
        elif op == b"Td" and len(operands) >= 2:
            lm = multiply((1, 0, 0, 1, operands[-2][1], operands[-1][1]), lm)
            tm = lm
        elif op == b"TD" and len(operands) >= 2:
            leading = -operands[-1][1]
            lm = multiply((1, 0, 0, 1, operands[-2][1], operands[-1][1]), lm)
            tm = lm
        elif op == b"T*":
            newline()
        elif op == b"Tj" and operands:
            show(operands[-1][1])
        elif op == b"'" and operands:
            newline()
            show(operands[-1][1])
        elif op == b'"' and operands:
            newline()
            show(operands[-1][1])
        elif op == b"TJ" and operands and isinstance(operands[-1], list):
            pieces = operands[-1]
            text = b"".join(v for k, v in pieces if k == "str")
            kern = sum(v for k, v in pieces if k == "num")
            show(text)
            # TJ numbers shift the next origin by -v/1000 * size
            tm = multiply((1, 0, 0, 1, -kern / 1000.0 * size, 0), tm)
        operands = []
    return runs


def page_to_spans(runs: list[TextRun], width: float, height: float) -> list[dict]:
    spans = []
    for run in runs:
        if not run.text.strip():
            continue
        ascent, descent = ascent_descent(run.font, run.size)
        x0 = min(max(run.x, 0.0), width)
        x1 = min(max(run.x + run.width, x0), width)
        y0 = min(max(height - (run.y + ascent), 0.0), height)
        y1 = min(max(height - (run.y + descent), y0), height)
        order = len(spans)
        spans.append({
            "id": order,
            "text": run.text,
            "bbox": [round(x0, 2), round(y0, 2), round(x1, 2), round(y1, 2)],
            "order": order,
            "gold_label": None,
        })
    return spans


def canonical_dumps(data) -> str:
    # Matches the engine's canonical page serialization.
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def parse_page_range(text: str | None, count: int) -> range:
    if text is None:
        return range(count)
    match = re.fullmatch(r"(\d+)(?:-(\d+))?", text)
    if not match:
        raise ValueError(f"bad --pages range {text!r}; expected a or a-b (1-based)")
    first = int(match.group(1))
    last = int(match.group(2) or first)
    if first < 1 or last < first:
        raise ValueError(f"bad --pages range {text!r}")
    return range(first - 1, min(last, count))


def extract(pdf_path: Path, out_dir: Path, pages: str | None = None) -> int:
    data = pdf_path.read_bytes()
    if not data.startswith(b"%PDF"):
        raise PdfError(f"{pdf_path}: not a PDF (missing %PDF header)")
    trailer = find_trailer(data)
    if re.search(rb"/Encrypt\b", trailer):
        raise PdfError(f"{pdf_path}: encrypted PDFs are not supported")
    objects = parse_objects(data)
    root_ref = get_ref(trailer, b"Root")
    if root_ref is None or root_ref not in objects:
        raise PdfError(f"{pdf_path}: trailer has no usable /Root")
    pages_ref = get_ref(objects[root_ref], b"Pages")
    if pages_ref is None:
        raise PdfError(f"{pdf_path}: catalog has no /Pages")
    page_nodes = walk_pages(objects, pages_ref, {"media_box": [0.0, 0.0, 612.0, 792.0]})

    out_dir.mkdir(parents=True, exist_ok=True)
    stem = pdf_path.stem
    written = 0
    for idx in parse_page_range(pages, len(page_nodes)):
        node = page_nodes[idx]
        media = node["media_box"]
        width, height = media[2] - media[0], media[3] - media[1]
        stream = content_stream(objects, node["body"])
        runs = interpret(stream, node.get("fonts") or {})
        spans = page_to_spans(runs, width, height)
        if not spans:
            print(f"warning: page {idx} has no text spans", file=sys.stderr)
        page = {
            "page_id": f"{stem}_p{idx}",
            "width": float(width),
            "height": float(height),
            "spans": spans,
            "reference_markdown": None,
        }
        (out_dir / f"{stem}_p{idx}.json").write_text(canonical_dumps(page), encoding="utf-8")
        written += 1
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("pdf", type=Path)
    parser.add_argument("out_dir", type=Path)
    parser.add_argument("--pages", help="1-based page range, e.g. 2 or 1-3")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        count = extract(args.pdf, args.out_dir, args.pages)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, PdfError, zlib.error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps({"pages_written": count, "out_dir": str(args.out_dir)}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
