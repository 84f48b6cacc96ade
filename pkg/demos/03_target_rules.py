#!/usr/bin/env python3
"""Exercise the targeted/untargeted rule engine and show its decision traces.

The engine runs seven ordered rules over lightly annotated tokens; the
first match decides. The builtin annotator used here is intentionally
naive (pronoun list, capitalization, a small gazetteer, verb suffixes);
pre-annotated files from stronger taggers can be plugged in instead.
"""
from offlang.data import Dataset, DatasetRecord
from offlang.heuristics import (
    annotate_builtin,
    build_lexicon,
    classify_target,
    default_stoplist,
    seed_lexicon,
)
from offlang.preprocess import tokenize

RULE_TEXT = {
    1: "lexicon hashtag",
    2: "lexicon token",
    3: "no entity / pronoun / proper noun",
    4: "'he is' / 'she is' / 'you are'",
    5: "hashtag start, verb then entity",
    6: "named entity present",
    7: "default",
}

lexicon = seed_lexicon()
print(f"seed lexicon: {sorted(lexicon.hashtags)} + {len(lexicon.tokens)} tokens\n")

TWEETS = [
    "#MAGA all the way",
    "antifa is the real problem",
    "complete garbage everywhere",
    "you are a disgrace",
    "#losers destroy Obama daily",
    "America deserves better",
    "they are pathetic",
]

print(f"{'tweet':<34} {'tags':<38} label rule")
for text in TWEETS:
    tokens = [t.surface for t in tokenize(text).tokens]
    annotated = annotate_builtin(tokens)
    label, trace = classify_target(annotated, lexicon)
    tags = " ".join(annotated.pos_tags)
    print(f"{text:<34} {tags:<38} {label}   R{trace.rule_fired} ({RULE_TEXT[trace.rule_fired]})")

print("\nentities found along the way:")
for text in TWEETS:
    tokens = [t.surface for t in tokenize(text).tokens]
    annotated = annotate_builtin(tokens)
    if annotated.entities:
        spans = ", ".join(f"{tokens[s.start]}:{s.type}" for s in annotated.entities)
        print(f"  {text!r}: {spans}")

print("\nbuilding a fresh lexicon from a (tiny) training corpus:")
corpus = Dataset(tuple(
    DatasetRecord(str(i), text, "OFF", "TIN")
    for i, text in enumerate([
        "#maga #maga crowd again",
        "#maga #qanon the usual antifa antifa",
        "antifa trump trump president",
    ])
))
built = build_lexicon(corpus, stoplist=default_stoplist(), k=3)
print(f"  hashtags: {sorted(built.hashtags)}")
print(f"  tokens:   {sorted(built.tokens)}")
