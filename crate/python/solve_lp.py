"""Solve an LP-format model with HiGHS and print a solution file.

Usage: python solve_lp.py MODEL.lp [OUT.txt]

Output lines are ``objective <value>`` followed by ``<name> <value>`` for
every column, the format read by ``interdict import-solution``.
"""

import sys

import highspy


def solve(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    if h.readModel(path) != highspy.HighsStatus.kOk:
        raise SystemExit(f"could not read {path}")
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        raise SystemExit(f"solver status: {h.modelStatusToString(status)}")
    lp = h.getLp()
    values = h.getSolution().col_value
    lines = [f"objective {h.getInfo().objective_function_value!r}"]
    for name, value in zip(lp.col_names_, values):
        if abs(value - round(value)) < 1e-6:
            value = float(round(value))
        lines.append(f"{name} {value!r}")
    return "\n".join(lines) + "\n"


def main(argv):
    if len(argv) not in (2, 3):
        raise SystemExit(__doc__)
    text = solve(argv[1])
    if len(argv) == 3:
        with open(argv[2], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main(sys.argv)
