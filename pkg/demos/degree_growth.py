"""Solving degree of both modelings as the block count grows, for l = 4."""

from rmqlab.cli import table1_row

if __name__ == "__main__":
    for w in (2, 3, 4, 5):
        row = table1_row(2, w, compact=w <= 5)
        print(f"w={w} m={row['m']} seed={row['seed']}: quadratic d={row['d_quadratic']} "
              f"({row['rows_quadratic']} rows), compact d={row['d_alt']} ({row['rows_alt']} rows)")
