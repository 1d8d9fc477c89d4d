"""Smoke test for the `singable` Python module.

Build first, e.g. `maturin develop -m python/pyproject.toml`, then run
`python3 python/smoke_test.py`.
"""

import math
import pathlib
import tempfile

import singable

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def read_pairs(name):
    lines = (DATA / "oracle" / name).read_text(encoding="utf-8").splitlines()
    return [tuple(line.split("\t")) for line in lines if line]


def main():
    profile = singable.Profile(str(DATA / "oracle" / "profile.toml"))
    assert profile.count_syllables("月亮光") == 3
    assert profile.rhyme_class("光") == 10
    assert profile.segment("月亮光")[2] == [2]

    c = singable.Constraints.parse("L=4 R=3 B=2")
    assert (c.length, c.rhyme, c.boundaries) == (4, 3, [2])
    assert c == singable.Constraints(4, 3, [2])
    assert str(c.mirrored()) == "L=4 R=3 B=2"
    assert c.prompt() == ["len_4", "rhy_3", "bdr_0", "bdr_1", "bdr_0", "bdr_0"]

    melody = (DATA / "melody" / "mixed.json").read_text()
    assert [str(x) for x in singable.extract_boundaries(melody)] == ["L=5 R=0 B=2,3"]

    model = singable.Model.train(read_pairs("train.tsv"), profile, seed=1)
    assert model.direction == "reverse"
    with tempfile.TemporaryDirectory() as tmp:
        path = str(pathlib.Path(tmp) / "model.json")
        model.save(path)
        model = singable.Model.load(path)

    test = read_pairs("test.tsv")[:50]
    sources = [s for s, _ in test]
    refs = [t for _, t in test]
    cons = [singable.constraints_from_target(t, profile, seed=i) for i, t in enumerate(refs)]
    hyps = []
    for s, k in zip(sources, cons):
        out = model.translate(s, k, hard_length=True, profile=profile)
        assert out.length_ok and out.rhyme_ok is not False
        hyps.append(out.text)
    report = dict(singable.evaluate(hyps, profile, references=refs, constraints=cons))
    assert report["length_accuracy"] == 1.0
    assert report["rhyme_accuracy"] == 1.0
    print("report", report)

    ranking = model.rank_rhymes(sources[:8], [k.with_rhyme(0) for k in cons[:8]])
    assert len(ranking) == 14
    assert math.isclose(sum(p for _, p in ranking), 1.0)

    assert singable.ter("kitten", "sitting") == 3 / 7
    assert singable.bleu("abcd", "abcd") == 1.0
    corrupted, original = singable.corrupt("月亮我眼泪路你", profile, seed=3)
    assert original == "月亮我眼泪路你" and "<mask>" in corrupted

    try:
        singable.Constraints.parse("L=0 R=0 B=")
    except singable.SingableError:
        pass
    else:
        raise AssertionError("invalid constraints accepted")
    print("ok")


if __name__ == "__main__":
    main()
