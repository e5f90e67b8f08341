"""Satisfiability with global counting, checked against the brute-force search.

The solver builds trees bottom-up; every witness it returns is re-checked
by evaluating the formula directly on that tree.
"""
from mutlin.formula import parse_formula
from mutlin.solver import satisfiable
from mutlin.trees import binary_to_nary, brute_force_sat, sat_on_tree

formulas = [
    # more than four p2 nodes, each with more than one p1 node in its subtree
    "#(#(p1) > 1 & p2) > 4",
    # contradictory counts
    "#(p) > 3 & #(p) <= 3",
    # a q child somewhere, and exactly two q nodes overall
    "<dn>q & #(q) > 1 & #(q) <= 2",
]

for text in formulas:
    f = parse_formula(text)
    r = satisfiable(f)
    print(f"{text}\n  -> {'SAT' if r.sat else 'UNSAT'} after {r.steps} rounds, {r.stats.guesses} guess(es)")
    if r.sat:
        assert sat_on_tree(f, r.kripke)
        print(f"  witness ({r.kripke.size} nodes, binary encoding):")
        print("    " + str(r.kripke).replace("\n", "\n    "))
        try:
            t = binary_to_nary(r.kripke)
            print("  as an unranked tree:")
            print("    " + str(t).replace("\n", "\n    "))
        except ValueError:
            print("  (the root has siblings, so this is a forest)")
    small = brute_force_sat(f, 4)
    print(f"  oracle up to 4 nodes: {'found ' + str(small.size) + '-node tree' if small else 'nothing'}\n")
