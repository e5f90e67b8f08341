"""Containment of counting path queries.

A query selects pairs (start, target).  Containment is decided by asking
the solver for a tree on which some pair of the left query is missing from
the right one; that tree comes back as a counterexample.
"""
from mutlin.cpath import eval_cpath, parse_cpath, query_contained, translate_query

pairs = [
    ("dn::a[dn*::b > 1]", "dn::a[dn*::b > 0]"),
    ("dn::a[dn*::b > 0]", "dn::a[dn*::b > 1]"),
    ("dn/dn*", "dn*/dn"),
    ("T/dn::a", "dn::a"),
]

for left, right in pairs:
    v = query_contained(left, right)
    print(f"{left}  <=  {right} : {'yes' if v.holds else 'no'}")
    if not v.holds:
        t = v.counterexample
        extra = eval_cpath(parse_cpath(left), t) - eval_cpath(parse_cpath(right), t)
        print("  counterexample tree:")
        print("    " + str(t).replace("\n", "\n    "))
        print(f"  pairs only the left query selects: {sorted(extra)}")

q = parse_cpath("dn::a[dn*::b > 1]")
print(f"\ntranslation of {q}:\n  {translate_query(q)}")
