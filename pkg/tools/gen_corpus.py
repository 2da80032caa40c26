#!/usr/bin/env python3
"""Generate the deterministic ASCII prose corpus fixture.

One sample per line, plain ASCII sentences built from a fixed lexicon with
a seeded RNG, so the file regenerates byte-identically. The combined file
is comfortably larger than the biggest benchmark window (131072 bytes).

Usage: python3 tools/gen_corpus.py [out_path]
"""

import random
import sys
from pathlib import Path

SAMPLES = 100
SEED = 20240613

LEXICON = """
the a an and or but of in on at to from with without over under between
through during before after above below again further then once here there
when where why how all any both each few more most other some such only own
same so than too very just because while about against into nearby toward
time year people way day man woman child world life hand part eye place work
week case point government company number group problem fact water room
mother area money story month lot right study book job word business issue
side kind head house service friend father power hour game line end member
law car city community name team minute idea body information back parent
face others level office door health person art war history party result
change morning reason research girl guy moment air teacher force education
be have do say get make go know take see come think look want give use find
tell ask seem feel try leave call keep provide hold turn follow begin show
hear play run move like live believe bring happen write sit stand lose pay
meet include continue set learn lead understand watch remain speak read grow
open walk win offer remember love consider appear buy wait serve die send
expect build stay fall cut reach kill raise pass sell require report decide
pull good new first last long great little old big high different small
large next early young important public bad able recent strong possible
whole free military true federal international full special easy clear
recent certain personal open red difficult available likely short single
medical current wrong private past foreign fine common poor natural
significant similar hot dead central happy serious ready simple left
physical general environmental financial blue democratic dark various
entire close legal religious cold final main green nice huge popular
traditional cultural quickly slowly carefully suddenly finally usually
however therefore meanwhile instead almost often never always sometimes
""".split()


def build_sample(rng: random.Random) -> str:
    sentences = []
    for _ in range(rng.randrange(24, 40)):
        count = rng.randrange(6, 15)
        words = [rng.choice(LEXICON) for _ in range(count)]
        if count >= 9 and rng.random() < 0.5:
            words[rng.randrange(3, count - 2)] += ","
        sentence = " ".join(words)
        sentences.append(sentence[0].upper() + sentence[1:] + ".")
    return " ".join(sentences)


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/data/prose_corpus.txt")
    rng = random.Random(SEED)
    lines = [build_sample(rng) for _ in range(SAMPLES)]
    text = "\n".join(lines) + "\n"
    assert text.isascii()
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="ascii")
    print(f"wrote {out}: {SAMPLES} samples, {len(text)} bytes")


if __name__ == "__main__":
    main()
