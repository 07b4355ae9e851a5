#!/usr/bin/env python3
"""Fetch an article page, cache it, and print a short plain-text summary."""

import html
import re
import sys

import requests

CACHE_DIR = "./.cache"
MAX_SENTENCES = 3


def fetch(section, slug):
    resp = requests.get(f"https://{section}.example.com/articles/{slug}", timeout=10)
    resp.raise_for_status()
    with open(f"./.cache/{slug}.html", "w", encoding="utf-8") as fh:
        fh.write(resp.text)


def summarise(slug):
    with open(f"./.cache/{slug}.html", encoding="utf-8") as fh:
        page = fh.read()
    text = re.sub(r"<[^>]+>", " ", page)
    text = html.unescape(re.sub(r"\s+", " ", text)).strip()
    sentences = re.split(r"(?<=[.!?])\s+", text)
    return " ".join(sentences[:MAX_SENTENCES])


def main(argv):
    if len(argv) != 3:
        print("usage: summarise.py SECTION SLUG", file=sys.stderr)
        return 2
    section, slug = argv[1], argv[2]
    fetch(section, slug)
    print(summarise(slug))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
