#!/usr/bin/env python3
"""Walk through the tweet preprocessing stages on a handful of examples.

Shows the three stages separately (tokenize, segment hashtags, normalize)
and then the composed pipeline that feeds the classifiers.
"""
from offlang.preprocess import NormalizationTable, normalize, preprocess_pipeline, tokenize
from offlang.segmentation import SegmentationDictionary, default_dictionary, segment_hashtag

SAMPLES = [
    "@USER she is a #fatbastard!!",
    "b**ch please :) URL",
    "that sob blocked me",
    "#GunControl now, not later",
    "gr8 day with 2 dogs http://t.co/xyz",
]

print("=== 1. tokenize ===============================================")
print("Every non-whitespace character lands in exactly one typed token.\n")
for text in SAMPLES:
    tokens = tokenize(text)
    shown = "  ".join(f"{t.surface}/{t.kind[:4]}" for t in tokens.tokens)
    print(f"{text!r}\n    -> {shown}\n")

print("=== 2. hashtag segmentation ===================================")
print("Unigram model, dynamic programming over split points. Unknown")
print("chunks pay a penalty that grows with their length, so junk stays")
print("in one piece instead of exploding into letters.\n")
for tag in ("fatbastard", "guncontrol", "maga", "lockherup", "qqqzzz"):
    print(f"#{tag:<12} -> {segment_hashtag(tag)}")

custom = SegmentationDictionary({"gun": 1000, "control": 800, "gu": 1, "ncontrol": 1})
print(f"\nwith a custom 4-word dictionary: {segment_hashtag('guncontrol', custom)}")
print(f"shipped dictionary size: {len(default_dictionary().counts)} words")

print("\n=== 3. normalize ==============================================")
print("Mentions and URLs are dropped, '#' is stripped, everything is")
print("lowercased, and censored profanity maps to a canonical form.\n")
table = NormalizationTable.default()
for text in SAMPLES:
    print(f"{text!r}\n    -> {normalize(tokenize(text), table)}\n")

print("=== 4. the composed pipeline ==================================")
for text in SAMPLES:
    print(f"{text!r}\n    -> {preprocess_pipeline(text)}\n")

print("The pipeline is idempotent on its own output:")
once = preprocess_pipeline(SAMPLES[0])
again = preprocess_pipeline(" ".join(once))
print(f"    {once} -> {again} (equal: {once == again})")
