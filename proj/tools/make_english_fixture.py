#!/usr/bin/env python3
"""Build tests/data/english.txt from two public English text samples.

Inputs (both ship with the gensim source distribution under
gensim/test/test_data/):
  lee_background.cor   news articles, one per line
  enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2

Wikipedia markup is stripped down to plain prose paragraphs; the result is
folded to ASCII. Usage:
  make_english_fixture.py LEE WIKI_BZ2 OUT [--target-bytes N]
"""
import argparse
import bz2
import html
import re
import unicodedata


def strip_nested(text, open_tok, close_tok):
    out = []
    depth = 0
    i = 0
    while i < len(text):
        if text.startswith(open_tok, i):
            depth += 1
            i += len(open_tok)
        elif depth and text.startswith(close_tok, i):
            depth -= 1
            i += len(close_tok)
        else:
            if depth == 0:
                out.append(text[i])
            i += 1
    return "".join(out)


def clean_wiki(raw):
    text = html.unescape(raw)
    text = re.sub(r"<!--.*?-->", " ", text, flags=re.S)
    text = re.sub(r"<ref[^>]*/>", " ", text)
    text = re.sub(r"<ref.*?</ref>", " ", text, flags=re.S)
    text = strip_nested(text, "{{", "}}")
    text = strip_nested(text, "{|", "|}")
    text = re.sub(r"<[^>]+>", " ", text)
    text = re.sub(r"\[\[(?:File|Image|Category|[a-z\-]+):[^\]]*\]\]", " ", text)
    text = re.sub(r"\[\[([^\]|]*)\|([^\]]*)\]\]", r"\2", text)
    text = re.sub(r"\[\[([^\]]*)\]\]", r"\1", text)
    text = re.sub(r"\[https?://\S+\s*([^\]]*)\]", r"\1", text)
    text = re.sub(r"https?://\S+", " ", text)
    text = re.sub(r"'{2,}", "", text)
    paragraphs = []
    for line in text.split("\n"):
        line = line.strip()
        if not line or line[0] in "=|!*#:;{}[]<":
            continue
        if len(line) < 200 or "|" in line or "[" in line or "]" in line:
            continue
        line = re.sub(r"\s+", " ", line)
        line = re.sub(r"\(\s*[,;]?\s*\)", "", line)
        paragraphs.append(line)
    return paragraphs


def to_ascii(text):
    folded = unicodedata.normalize("NFKD", text)
    return folded.encode("ascii", "ignore").decode("ascii")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("lee")
    ap.add_argument("wiki")
    ap.add_argument("out")
    ap.add_argument("--target-bytes", type=int, default=700_000)
    args = ap.parse_args()

    lines = []
    with open(args.lee, encoding="latin-1") as f:
        lines.extend(to_ascii(l.strip()) for l in f if l.strip())

    with bz2.open(args.wiki, "rt", encoding="utf-8") as f:
        xml = f.read()
    for page in re.findall(r"<text[^>]*>(.*?)</text>", xml, flags=re.S):
        if page.lstrip().upper().startswith("#REDIRECT"):
            continue
        lines.extend(to_ascii(p) for p in clean_wiki(page))

    out, total = [], 0
    for line in lines:
        if total >= args.target_bytes:
            break
        out.append(line)
        total += len(line) + 1
    with open(args.out, "w", encoding="ascii") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
