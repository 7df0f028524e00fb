"""Run the bound-verification campaign and summarize the verdicts.

Every analytical bound in the catalog is evaluated against an exact
comparator (kernel iteration or linear solve) on a parameter grid.
"Inconclusive" marks reference values sitting within one error bar of
an envelope endpoint, such as sandwiches that are tight at m = 1.
"""

from collections import Counter

from avalanche import bounds as bc
from avalanche.harness import verify_campaign


def main():
    reports = verify_campaign()
    by_name = Counter()
    verdicts = Counter()
    for rep in reports:
        verdicts[rep.satisfied] += 1
        by_name[(rep.name, rep.satisfied)] += 1

    print(f"{len(reports)} bound evaluations:")
    for verdict in (bc.HOLDS, bc.INCONCLUSIVE, bc.VIOLATED):
        print(f"  {verdict}: {verdicts[verdict]}")

    print("\nper bound:")
    names = sorted({name for name, _ in by_name})
    for name in names:
        parts = [f"{by_name[(name, v)]} {v}"
                 for v in (bc.HOLDS, bc.INCONCLUSIVE, bc.VIOLATED)
                 if by_name[(name, v)]]
        print(f"  {name}: {', '.join(parts)}")

    bad = [rep for rep in reports if rep.satisfied == bc.VIOLATED]
    if bad:
        print("\nVIOLATIONS:")
        for rep in bad:
            print(" ", rep.to_dict())
    else:
        print("\nno violations.")


if __name__ == "__main__":
    main()
