"""Regenerate the bundled language profiles.

Requires pypinyin, jieba, opencc-python-reimplemented, cmudict and the
wordfreq data files on PYTHONPATH. Output goes to crates/core/profiles/.
"""
import collections
import gzip
import os
import sys

import cmudict
import jieba
import msgpack
import opencc
import importlib.util
from pypinyin import Style, pinyin

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "profiles")

RHYME_CLASSES = [
    (1, "ma", ["a", "ia", "ua"]),
    (2, "bo", ["o", "e", "uo", "io"]),
    (3, "jie", ["ie", "ve"]),
    (4, "kai", ["ai", "uai"]),
    (5, "wei", ["ei", "uei"]),
    (6, "hao", ["ao", "iao"]),
    (7, "you", ["ou", "iou"]),
    (8, "han", ["an", "ian", "uan", "van"]),
    (9, "wen", ["en", "in", "uen", "vn"]),
    (10, "tang", ["ang", "iang", "uang"]),
    (11, "geng", ["eng", "ing", "ong", "iong", "ueng"]),
    (12, "qi", ["i", "er", "v"]),
    (13, "zhi", ["-i"]),
    (14, "gu", ["u"]),
]
NONSTANDARD = {"n", "ng", "m", "hm", "hng", "ê", "ế", "ề"}


def toml_str(s):
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def mandarin():
    dict_path = os.path.join(os.path.dirname(jieba.__file__), "dict.txt")
    entries = [line.split() for line in open(dict_path, encoding="utf8")]
    han = lambda c: "一" <= c <= "鿿"
    chars = collections.Counter()
    lexicon = []
    for word, freq, *_ in entries:
        for c in word:
            if han(c):
                chars[c] += int(freq)
        if 2 <= len(word) <= 4 and int(freq) >= 100 and all(han(c) for c in word):
            lexicon.append(word)
    readings = {}
    for c in sorted(chars):
        r = pinyin(c, style=Style.NORMAL, heteronym=False)[0][0]
        if r in NONSTANDARD or not r.isascii() or not r.isalpha():
            continue
        readings[c] = r
    t2s = {}
    table = os.path.join(os.path.dirname(opencc.__file__), "dictionary", "TSCharacters.txt")
    for line in open(table, encoding="utf8"):
        trad, simp = line.rstrip("\n").split("\t")[:2]
        simp = simp.split(" ")[0]
        if len(trad) == 1 and len(simp) == 1 and trad != simp and simp in readings:
            t2s[trad] = simp
    lines = [
        "# Mandarin (simplified) profile. Generated by tools/gen_profiles.py.",
        "format_version = 1",
        'id = "zh-cmn"',
        'syllable_rule = "han-character"',
        "lexicon = [",
    ]
    lines += ["  " + ", ".join(toml_str(w) for w in lexicon[i:i + 12]) + "," for i in range(0, len(lexicon), 12)]
    lines.append("]")
    lines.append("")
    lines.append("[rhyme_classes]")
    for idx, name, finals in RHYME_CLASSES:
        lines.append(f"{idx} = {{ name = {toml_str(name)}, finals = [{', '.join(toml_str(f) for f in finals)}] }}")
    lines.append("")
    lines.append("[readings]")
    lines += [f"{toml_str(c)} = {toml_str(r)}" for c, r in readings.items()]
    lines.append("")
    lines.append("[normalize]")
    lines += [f"{toml_str(t)} = {toml_str(s)}" for t, s in sorted(t2s.items())]
    with open(os.path.join(OUT, "zh-cmn.toml"), "w", encoding="utf8") as f:
        f.write("\n".join(lines) + "\n")
    print("zh-cmn:", len(lexicon), "words,", len(readings), "readings,", len(t2s), "t2s", file=sys.stderr)


def english(limit=8000):
    path = os.path.join(os.path.dirname(importlib.util.find_spec("wordfreq").origin), "data", "small_en.msgpack.gz")
    buckets = msgpack.load(gzip.open(path), raw=False)[1:]
    cmu = cmudict.dict()
    out = {}
    for bucket in buckets:
        for w in bucket:
            if len(out) >= limit:
                break
            if w.isascii() and w.isalpha() and w in cmu:
                out[w] = sum(1 for ph in cmu[w][0] if ph[-1].isdigit())
    lines = [
        "# English profile. Generated by tools/gen_profiles.py.",
        "format_version = 1",
        'id = "en"',
        'syllable_rule = "vowel-group"',
        "lexicon = []",
        "",
        "[syllable_dict]",
    ]
    lines += [f"{w} = {n}" for w, n in sorted(out.items()) if n >= 1]
    with open(os.path.join(OUT, "en.toml"), "w", encoding="utf8") as f:
        f.write("\n".join(lines) + "\n")
    print("en:", len(out), "words", file=sys.stderr)


if __name__ == "__main__":
    mandarin()
    english()
