"""Why the second weight slot cannot degenerate to a delta shell.

The second weight is mollified over an annulus of width eps around r=1.
As eps shrinks, the annulus part of the right-hand side (weighted by
1/(m + 1/eps - lambda)) vanishes while the shell left-hand side stays
fixed, so the inequality gains nothing in the limit.

Run:  python demos/06_mollified_delta.py
"""

from hardydirac import SpinorField, exp_profile, mollified_delta_experiment


def main():
    field = SpinorField.single(0, exp_profile(0, 1.0))
    rows = mollified_delta_experiment(c1=1.0, c2=0.25, R=2.0,
                                      eps_list=[0.8, 0.4, 0.2, 0.1, 0.05],
                                      field_=field, m=1.0, lam=0.0)
    print(f"{'eps':>6} {'lhs':>12} {'bulk':>12} {'annulus':>12} "
          f"{'mass':>12} {'ratio':>10}")
    for row in rows:
        print(f"{row.eps:6.2f} {row.lhs:12.6f} {row.bulk_term:12.6f} "
              f"{row.annulus_term:12.3e} {row.mass_term:12.6f} {row.ratio:10.6f}")
    print("\nannulus term per eps halving:")
    for a, b in zip(rows, rows[1:]):
        print(f"  eps {a.eps} -> {b.eps}: factor {b.annulus_term/a.annulus_term:.3f}")
    print("\nthe left-hand side never moves; the annulus contribution dies away")


if __name__ == "__main__":
    main()
