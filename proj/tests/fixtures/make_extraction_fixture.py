#!/usr/bin/env python3
"""Builds the 50-document extraction fixture and its expected inventory.

Every snippet below carries its expected items written out by hand. Documents
are either written out in full (SPECIAL) or assembled from snippets separated
by prose, so the expected structure set of a document is the concatenation of
its snippets' expectations with spans located by construction.

Usage: make_extraction_fixture.py OUT_DIR
"""

import json
import random
import sys
from pathlib import Path

# (name, text, expected) where expected is None or (kind, items).
POSITIVE = [
    ("numbered_fruits",
     "1. apple\n2. banana\n3. cherry\n4. date\n5. elderberry",
     ("numbered_list", ["apple", "banana", "cherry", "date", "elderberry"])),
    ("numbered_paren",
     "1) boil water\n2) add pasta\n3) stir often\n4) taste one\n5) drain\n6) add sauce",
     ("numbered_list", ["boil water", "add pasta", "stir often", "taste one", "drain", "add sauce"])),
    ("dash_bullets",
     "- red\n- orange\n- yellow\n- green\n- blue",
     ("bullet_list", ["red", "orange", "yellow", "green", "blue"])),
    ("star_bullets",
     "* Monday\n* Tuesday\n* Wednesday\n* Thursday\n* Friday\n* Saturday\n* Sunday",
     ("bullet_list", ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"])),
    ("dot_bullets",
     "• north\n• east\n• south\n• west\n• up",
     ("bullet_list", ["north", "east", "south", "west", "up"])),
    ("table_planets",
     "| planet | moons | rings |\n|---|---|---|\n| Mercury | 0 | no |\n| Venus | 0 | no |\n"
     "| Earth | 1 | no |\n| Mars | 2 | no |\n| Jupiter | 95 | yes |",
     ("markdown_table", ["Mercury | 0 | no", "Venus | 0 | no", "Earth | 1 | no", "Mars | 2 | no",
                         "Jupiter | 95 | yes"])),
    ("code_python",
     "```python\ndef area(w, h):\n    if w < 0:\n        raise ValueError(w)\n\n    return w * h\n\nprint(area(2, 3))\n```",
     ("code_block", ["def area(w, h):", "if w < 0:", "raise ValueError(w)", "return w * h",
                     "print(area(2, 3))"])),
    ("loose_numbered",
     "1. wake up\n\n2. stretch\n\n3. make coffee\n\n4. read mail\n\n5. start work",
     ("numbered_list", ["wake up", "stretch", "make coffee", "read mail", "start work"])),
    ("numbered_nested",
     "1. Setup\n   - install compiler\n   - clone repo\n2. Build\n3. Test\n   run the suite twice\n4. Package\n5. Release",
     ("numbered_list", ["Setup", "Build", "Test", "Package", "Release"])),
    ("bullets_duplicate",
     "- salt\n- pepper\n- salt\n- cumin\n- paprika\n- thyme",
     ("bullet_list", ["salt", "pepper", "cumin", "paprika", "thyme"])),
    ("bullets_long_item",
     "- short one\n- " + "x" * 61 + "\n- short two\n- short three\n- short four\n- short five",
     ("bullet_list", ["short one", "short two", "short three", "short four", "short five"])),
    ("numbered_spaces",
     "1.   alpha   \n2. beta\t\n3.\tgamma\n4. delta  \n5.  epsilon",
     ("numbered_list", ["alpha", "beta", "gamma", "delta", "epsilon"])),
    ("table_aligned",
     "name | score\n:--- | ---:\nAda | 12\nBo | 9\nCy | 15\nDee | 7\nEli | 11",
     ("markdown_table", ["Ada | 12", "Bo | 9", "Cy | 15", "Dee | 7", "Eli | 11"])),
    ("code_shell",
     "```\nmkdir build\ncd build\ncmake ..\nmake -j4\nctest\n```",
     ("code_block", ["mkdir build", "cd build", "cmake ..", "make -j4", "ctest"])),
    ("bullets_multibyte",
     "- café\n- " + "é" * 60 + "\n- " + "é" * 61 + "\n- naïve\n- résumé\n- über",
     ("bullet_list", ["café", "é" * 60, "naïve", "résumé", "über"])),
    ("numbered_twelve",
     "\n".join(f"{i}. step {w}" for i, w in enumerate(
         ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve"], 1)),
     ("numbered_list", ["step one", "step two", "step three", "step four", "step five", "step six", "step seven",
                        "step eight", "step nine", "step ten", "step eleven", "step twelve"])),
    ("bullets_inline_markup",
     "- **bold** move\n- `code` span\n- [link](x)\n- _under_\n- plain",
     ("bullet_list", ["**bold** move", "`code` span", "[link](x)", "_under_", "plain"])),
    ("code_with_list_lines",
     "```\n1. not a list\n2. still code\n- nor a bullet\n| nor | table |\n|---|---|\n```",
     ("code_block", ["1. not a list", "2. still code", "- nor a bullet", "| nor | table |", "|---|---|"])),
    ("indented_bullets",
     "  - ant\n  - bee\n  - cat\n  - dog\n  - eel",
     ("bullet_list", ["ant", "bee", "cat", "dog", "eel"])),
]

NEGATIVE = [
    ("four_bullets", "- one\n- two\n- three\n- four"),
    ("four_numbered", "1. first\n2. second\n3. third\n4. fourth"),
    ("numbered_gap", "1. a\n2. b\n4. c\n5. d\n6. e"),
    ("bullets_dup_below", "- x\n- y\n- x\n- z\n- w"),
    ("table_four_rows", "| k | v |\n|---|---|\n| a | 1 |\n| b | 2 |\n| c | 3 |\n| d | 4 |"),
    ("code_four_lines", "```\nx = 1\n\ny = 2\nz = 3\nw = 4\n```"),
    ("thematic_breaks", "* * *\n- - -\n* * *\n- - -\n* * *"),
    ("pipes_no_separator", "a | b\nc | d\ne | f\ng | h\ni | j\nk | l"),
    ("mixed_glyphs", "- a\n- b\n* c\n* d\n- e"),
    ("mixed_delimiters", "1. a\n2. b\n3) c\n4) d\n5) e"),
    ("long_items", "- " + "y" * 70 + "\n- ok1\n- " + "z" * 65 + "\n- ok2\n- ok3\n- ok4"),
    ("no_space_markers", "-a\n-b\n-c\n-d\n-e\n1.a\n2.b\n3.c\n4.d\n5.e"),
]

PROSE = [
    "Here is some context before the next part.",
    "The notes continue below with more detail.",
    "That covers the first half of the discussion.",
    "Plain text keeps structures apart in these documents.",
    "Read the following carefully before answering.",
    "Some readers prefer prose over lists.",
]

# Documents written out in full, with their inventories stated directly.
# Spans are located by the generator from the quoted structure text.
SPECIAL = [
    ("prose_only", "Nothing structured lives here.\nJust two lines of prose.", []),
    ("crlf_numbered",
     "Intro line.\r\n1. one\r\n2. two\r\n3. three\r\n4. four\r\n5. five\r\nOutro.",
     [("numbered_list", ["one", "two", "three", "four", "five"], "1. one\r\n2. two\r\n3. three\r\n4. four\r\n5. five")]),
    ("blank_separated_bullets_merge",
     "- a1\n- a2\n- a3\n- a4\n\n- b1\n- b2\n- b3\n- b4",
     [("bullet_list", ["a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4"],
       "- a1\n- a2\n- a3\n- a4\n\n- b1\n- b2\n- b3\n- b4")]),
    ("numbered_restart",
     "1. x\n2. y\n3. z\n\n1. p\n2. q\n3. r\n4. s\n5. t",
     [("numbered_list", ["p", "q", "r", "s", "t"], "1. p\n2. q\n3. r\n4. s\n5. t")]),
    ("nested_list_not_separate",
     "1. fruit\n2. veg\n   - kale\n   - leek\n   - okra\n   - pea\n   - yam\n3. grain\n4. nut\n5. seed",
     [("numbered_list", ["fruit", "veg", "grain", "nut", "seed"],
       "1. fruit\n2. veg\n   - kale\n   - leek\n   - okra\n   - pea\n   - yam\n3. grain\n4. nut\n5. seed")]),
    ("all_kinds",
     "Intro.\n\n1. a\n2. b\n3. c\n4. d\n5. e\n\nMiddle.\n\n- f\n- g\n- h\n- i\n- j\n\nThen a table.\n\n"
     "| h1 | h2 |\n|----|----|\n| 1 | 2 |\n| 3 | 4 |\n| 5 | 6 |\n| 7 | 8 |\n| 9 | 10 |\n\nAnd code.\n\n"
     "```\nl1\nl2\nl3\nl4\nl5\n```\nDone.",
     [("numbered_list", ["a", "b", "c", "d", "e"], "1. a\n2. b\n3. c\n4. d\n5. e"),
      ("bullet_list", ["f", "g", "h", "i", "j"], "- f\n- g\n- h\n- i\n- j"),
      ("markdown_table", ["1 | 2", "3 | 4", "5 | 6", "7 | 8", "9 | 10"],
       "| h1 | h2 |\n|----|----|\n| 1 | 2 |\n| 3 | 4 |\n| 5 | 6 |\n| 7 | 8 |\n| 9 | 10 |"),
      ("code_block", ["l1", "l2", "l3", "l4", "l5"], "```\nl1\nl2\nl3\nl4\nl5\n```")]),
    ("list_then_code_fence_breaks",
     "- m1\n- m2\n- m3\n```\nc1\nc2\nc3\nc4\nc5\n```",
     [("code_block", ["c1", "c2", "c3", "c4", "c5"], "```\nc1\nc2\nc3\nc4\nc5\n```")]),
    ("table_stops_at_blank",
     "| a | b |\n|---|---|\n| 1 | 1 |\n| 2 | 2 |\n\n| 3 | 3 |\n| 4 | 4 |\n| 5 | 5 |",
     []),
    ("two_lists_back_to_back_glyphs",
     "- d1\n- d2\n- d3\n- d4\n- d5\n* s1\n* s2\n* s3\n* s4\n* s5",
     [("bullet_list", ["d1", "d2", "d3", "d4", "d5"], "- d1\n- d2\n- d3\n- d4\n- d5"),
      ("bullet_list", ["s1", "s2", "s3", "s4", "s5"], "* s1\n* s2\n* s3\n* s4\n* s5")]),
    ("whitespace_only_items",
     "- keep1\n-  \n- keep2\n- keep3\n- keep4\n- keep5",
     [("bullet_list", ["keep1", "keep2", "keep3", "keep4", "keep5"], "- keep1\n-  \n- keep2\n- keep3\n- keep4\n- keep5")]),
]


def locate(text, needle, start):
    pos = text.find(needle, start)
    if pos < 0:
        raise SystemExit(f"span text not found: {needle!r}")
    b = len(text[:pos].encode("utf-8"))
    return pos, b, b + len(needle.encode("utf-8"))


def special_docs():
    docs = []
    for name, text, expected in SPECIAL:
        inventory = []
        cursor = 0
        for kind, items, span_text in expected:
            pos, b, e = locate(text, span_text, cursor)
            cursor = pos + len(span_text)
            inventory.append({"kind": kind, "items": items, "begin": b, "end": e})
        docs.append((name, text, inventory))
    return docs


def composed_docs(count, rng):
    docs = []
    pool = [(n, t, e) for n, t, e in POSITIVE] + [(n, t, None) for n, t in NEGATIVE]
    for k in range(count):
        # Cycle through every snippet first so each appears at least once.
        picks = [pool[k % len(pool)]] + rng.sample(pool, rng.randint(0, 3))
        text = ""
        inventory = []
        for name, snippet, expected in picks:
            text += rng.choice(PROSE) + "\n\n"
            b = len(text.encode("utf-8"))
            text += snippet
            e = len(text.encode("utf-8"))
            text += "\n\n"
            if expected is not None:
                kind, items = expected
                inventory.append({"kind": kind, "items": items, "begin": b, "end": e})
        text += rng.choice(PROSE)
        docs.append((f"composed_{k:02d}", text, inventory))
    return docs


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    docs = special_docs()
    docs += composed_docs(50 - len(docs), random.Random(2024))
    assert len(docs) == 50
    with open(out / "documents.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for name, text, _ in docs:
            f.write(json.dumps({"id": name, "text": text}, ensure_ascii=False) + "\n")
    inventory = {name: inv for name, _, inv in docs}
    with open(out / "inventory.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(inventory, f, ensure_ascii=False, indent=1)
        f.write("\n")
    total = sum(len(v) for v in inventory.values())
    print(f"documents {len(docs)} structures {total}")


if __name__ == "__main__":
    main()
