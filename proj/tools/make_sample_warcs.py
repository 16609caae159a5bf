#!/usr/bin/env python3
"""Writes the two sample WARC files and their expected per-language counts.

Pages are assembled from the langid seed sentences, so the language of
every page is known by construction. Each page is given a fate (kept,
other language, too short, duplicate) and the expected counts are computed
from the visible text without running the pipeline.

    python3 tools/make_sample_warcs.py data/langid/seed tests/fixtures/warc
"""

import gzip
import html
import io
import json
import random
import sys
import uuid
from pathlib import Path

RETAINED = {"afr", "deu", "eng", "fra", "fry", "ita", "nld", "spa"}
LICENSES = [
    "https://creativecommons.org/licenses/by/4.0/",
    "https://creativecommons.org/licenses/by-sa/4.0/",
    "https://creativecommons.org/publicdomain/zero/1.0/",
]


def load_seed(seed_dir):
    out = {}
    for path in sorted(Path(seed_dir).glob("*.txt")):
        lines = [l.strip() for l in path.read_text(encoding="utf-8").splitlines()]
        out[path.stem] = [l for l in lines if l]
    return out


def build_page(rng, sentences, n_sentences):
    picked = rng.sample(sentences, n_sentences)
    title = picked[0].rstrip(".!?")
    paras = [" ".join(picked[i : i + 2]) for i in range(1, len(picked), 2)]
    footer = "Licentie CC BY"
    lic = rng.choice(LICENSES)
    body = "<h1>%s</h1>\n%s\n<footer><p><a rel=\"license\" href=\"%s\">%s</a></p></footer>" % (
        html.escape(title),
        "\n".join("<p>%s</p>" % html.escape(p) for p in paras),
        lic,
        footer,
    )
    doc = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>%s</title></head>\n<body>\n%s\n</body></html>\n" % (
        html.escape(title),
        body,
    )
    visible = [title] + paras + [footer]
    words = sum(len(v.split()) for v in visible)
    return doc, words


def warc_record(headers, block):
    head = "WARC/1.1\r\n" + "".join("%s: %s\r\n" % kv for kv in headers) + "Content-Length: %d\r\n\r\n" % len(block)
    return head.encode() + block + b"\r\n\r\n"


def response(url, payload, content_type, rng):
    http = ("HTTP/1.1 200 OK\r\nContent-Type: %s\r\nContent-Length: %d\r\n\r\n" % (content_type, len(payload))).encode()
    block = http + payload
    rid = uuid.UUID(int=rng.getrandbits(128))
    return warc_record(
        [
            ("WARC-Type", "response"),
            ("WARC-Record-ID", "<urn:uuid:%s>" % rid),
            ("WARC-Date", "2024-03-01T12:00:00Z"),
            ("WARC-Target-URI", url),
            ("Content-Type", "application/http; msgtype=response"),
        ],
        block,
    )


def request(url, rng):
    block = ("GET / HTTP/1.1\r\nHost: %s\r\n\r\n" % url.split("/")[2]).encode()
    rid = uuid.UUID(int=rng.getrandbits(128))
    return warc_record(
        [
            ("WARC-Type", "request"),
            ("WARC-Record-ID", "<urn:uuid:%s>" % rid),
            ("WARC-Date", "2024-03-01T12:00:00Z"),
            ("WARC-Target-URI", url),
            ("Content-Type", "application/http; msgtype=request"),
        ],
        block,
    )


def main():
    seed_dir, out_dir = Path(sys.argv[1]), Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240301)
    seed = load_seed(seed_dir)
    retained = {}
    kept = {}
    fates = {"kept": 0, "other_language": 0, "too_short": 0, "duplicate": 0, "non_html": 0}

    def tally(table, lang, words):
        t = table.setdefault(lang, {"documents": 0, "words": 0})
        t["documents"] += 1
        t["words"] += words

    for part in (0, 1):
        records = []
        page_no = 0
        langs = sorted(seed)
        for lang in langs:
            for _ in range(4 if part == 0 else 3):
                page_no += 1
                url = "https://www.%s-voorbeeld%d.org/pagina/%d" % (lang, part, page_no)
                doc, words = build_page(rng, seed[lang], rng.randint(6, 9))
                records.append(request(url, rng))
                records.append(response(url, doc.encode("utf-8"), "text/html; charset=utf-8", rng))
                if lang in RETAINED:
                    tally(retained, lang, words)
                    tally(kept, lang, words)
                    fates["kept"] += 1
                else:
                    fates["other_language"] += 1
                if lang == "nld" and page_no % 4 == 1:
                    # Same body under a second URL.
                    dup = url.replace("/pagina/", "/kopie/")
                    records.append(response(dup, doc.encode("utf-8"), "text/html; charset=utf-8", rng))
                    tally(retained, lang, words)
                    fates["duplicate"] += 1
        # A retained-language page too short for the quality bounds.
        short_lang = "eng" if part == 0 else "deu"
        short = max(seed[short_lang], key=len)
        doc = "<html><body><p>%s</p></body></html>" % html.escape(short)
        records.append(response("https://short%d.example.org/" % part, doc.encode(), "text/html", rng))
        tally(retained, short_lang, len(short.split()))
        fates["too_short"] += 1
        # Non-HTML payload.
        records.append(response("https://img%d.example.org/a.jpg" % part, bytes(range(256)), "image/jpeg", rng))
        fates["non_html"] += 1

        name = "sample-%d.warc" % part
        if part == 1:
            buf = io.BytesIO()
            for r in records:
                buf.write(gzip.compress(r, mtime=0))
            (out_dir / (name + ".gz")).write_bytes(buf.getvalue())
        else:
            (out_dir / name).write_bytes(b"".join(records))

    oracle = {"retained": retained, "kept": kept, "fates": fates}
    (out_dir / "expected_counts.json").write_text(json.dumps(oracle, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
