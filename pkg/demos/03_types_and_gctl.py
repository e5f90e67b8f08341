"""Tree types with child counts, and graded branching-time properties."""
from mutlin.ctypes import member, parse_ctype, type_contained, type_empty
from mutlin.gctl import eval_gctl, gctl_satisfiable, parse_gctl

print("-- types --")
doc = parse_ctype("book[(title . author+ . chapter[para > 1]*)]")
v = type_empty(doc)
print("book type inhabited:", not v.holds)
print("    " + str(v.counterexample).replace("\n", "\n    "))
assert member(v.counterexample, doc)

for a, b in [("p1[p2 > 3]", "p1[p2 > 1]"), ("p1[p2*]", "p1[p2 <= 5]"), ("(a . b)*", "(a + b)*")]:
    v = type_contained(a, b)
    print(f"{a}  <=  {b} : {'yes' if v.holds else 'no'}")
    if not v.holds and v.counterexample is not None:
        print("    " + str(v.counterexample).replace("\n", "\n    "))

print("\n-- graded CTL --")
for text in ["EX{>2} p & AX{<=1} ~p", "EU{>2}(p, q) & AX{<=0} p", "EG{>1} p & AG{<=0} ~q"]:
    v = gctl_satisfiable(text)
    print(f"{text} : {'satisfiable' if v.sat else 'unsatisfiable'}")
    if v.sat:
        print("    " + str(v.witness).replace("\n", "\n    "))
        assert eval_gctl(parse_gctl(text), v.witness)
