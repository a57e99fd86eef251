"""Print the exponent curves for the standard and compact modelings as aligned tables."""

from rmqlab.estimator import compare_all

STANDARD = ("brute", "plain", "full", "partial", "poly", "bjorklund", "dinur")
COMPACT = ("brute", "plain-alt", "full-alt", "partial-alt", "dinur-alt")


def show(ls, methods):
    rows = compare_all(ls, methods=methods)
    cell = {(r.method, r.l): r.tau for r in rows}
    print("l".rjust(5) + "".join(m.rjust(12) for m in methods))
    for l in ls:
        vals = [cell.get((m, l)) for m in methods]
        print(str(l).rjust(5) + "".join(("-" if v is None else f"{v:.4f}").rjust(12) for v in vals))


if __name__ == "__main__":
    show([2, 3, 4, 5, 6, 10, 20, 50, 100], STANDARD)
    print()
    show([2, 4, 8, 16, 32, 64, 128], COMPACT)
