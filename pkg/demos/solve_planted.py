"""Plant an instance and solve it with every solver, checking against brute force."""

import sys

from rmqlab.altmodel import alt_solve
from rmqlab.instance import brute_force_solve, default_m, plant_instance
from rmqlab.modeling import hybrid_solve, solve_plain
from rmqlab.polymethod import default_params, polymethod_solve


def main(l=4, w=3, seed=1):
    inst = plant_instance(l, w, default_m(l, w), seed)
    truth = brute_force_solve(inst)
    print(f"l={l} w={w} m={inst.m} planted={inst.planted.positions} brute force: {[s.positions for s in truth]}")
    runs = {
        "xl": solve_plain(inst),
        "hybrid-full": hybrid_solve(inst, "full", 0.5, all_solutions=True),
        "hybrid-partial": hybrid_solve(inst, "partial", 2, all_solutions=True),
        "alt-xl": alt_solve(inst),
    }
    if len(truth) == 1:
        runs["polymethod"] = polymethod_solve(inst, default_params(l, seed=seed, t=61))
    for name, rep in runs.items():
        same = "ok" if rep.solutions == truth else "MISMATCH"
        print(f"  {name:15s} d_solv={rep.solving_degree!s:4s} guesses={rep.guesses_tried:3d} "
              f"max matrix {rep.max_rows}x{rep.max_cols}  {same}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:]))
