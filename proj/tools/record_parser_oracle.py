#!/usr/bin/env python3
"""Records how html5lib shapes the body of small malformed documents.

The output is a compact tree notation compared against our parser in the
markup tests: elements as tag(children), text as "text", comments dropped,
adjacent text merged.

    python3 tools/record_parser_oracle.py > tests/fixtures/markup/malformed.json
"""

import json

import html5lib

CASES = [
    "<p>a<p>b",
    "<ul><li>a<li>b</ul>",
    "<ol><li>one<li>two<li>three</ol>",
    "<div>a<div>b</div>c",
    "<p>a<div>b</div>",
    "<table><tr><td>a<td>b</table>",
    "<dl><dt>k<dd>v<dt>k2<dd>v2</dl>",
    "<h1>a<h2>b",
    "<p>x<br>y",
    "<span>a</div>b",
    "text <!-- c --> more",
    "<p>a</p></p>b",
    "<select><option>a<option>b</select>",
    "<html><head><title>t</title></head><body>x</body></html>",
    "<body><p>a</body><p>b",
    "<meta charset=utf-8><p>after meta",
    "<p><a href=x>link<p>next",
    "<pre>\nline</pre>",
    "<ul><li>a<ul><li>b</ul><li>c</ul>",
    "<footer><p>f1<p>f2</footer>after",
]


def shape(el):
    parts = []
    if el.text:
        parts.append(json.dumps(el.text, ensure_ascii=False))
    for child in el:
        if isinstance(child.tag, str) and not child.tag.startswith("<"):
            tag = child.tag.split("}")[-1]
            parts.append("%s(%s)" % (tag, shape(child)))
        if child.tail:
            parts.append(json.dumps(child.tail, ensure_ascii=False))
    merged = []
    for p in parts:
        if merged and p.startswith('"') and merged[-1].startswith('"'):
            merged[-1] = json.dumps(json.loads(merged[-1]) + json.loads(p), ensure_ascii=False)
        else:
            merged.append(p)
    return " ".join(merged)


def main():
    out = []
    for case in CASES:
        doc = html5lib.parse(case, namespaceHTMLElements=False)
        body = doc.find("body")
        out.append({"input": case, "body": shape(body)})
    print(json.dumps({"parser": "html5lib " + html5lib.__version__, "cases": out}, indent=1, ensure_ascii=False))


if __name__ == "__main__":
    main()
