"""Hardy constants of two-weight pairs.

Computes the forward/backward constants for the Coulomb pair and the
shell-plus-Coulomb pair (both have closed-form values), the per-channel
table, the separately-scaled variants, and checks scaling invariance.

Run:  python demos/01_hardy_constants.py
"""

from hardydirac import a_k, a_minus, a_plus, parse_pair, scale_pair, tilde_constants


def main():
    coulomb = parse_pair("coulomb:1", "coulomb:1")
    print("Coulomb pair V1 = V2 = 1/r")
    print(f"  A+ = {a_plus(coulomb):.12f}   A- = {a_minus(coulomb):.12f}")
    tp, tm = tilde_constants(coulomb)
    print(f"  separately scaled: {tp:.12f}, {tm:.12f}")

    print("\nper-channel constants (Coulomb pair, exact value 1/|k+1|):")
    for k in (0, 1, 2, 3, -2, -3, -4):
        print(f"  k={k:+d}: A_k = {a_k(coulomb, k):.12f}")

    print("\nunit shell at R plus Coulomb second weight:")
    for R in (0.5, 1.0, 3.0):
        pair = parse_pair(f"shell:1@{R}", "coulomb:1")
        print(f"  R={R}: A+ = {a_plus(pair):.12f}  A- = {a_minus(pair):.12f}"
              f"  (independent of R)")
    pair = parse_pair("shell:1@1", "coulomb:1")
    print(f"  squared worst constant max(A+^2, A-^2) = {max(a_plus(pair), a_minus(pair))**2:.10f}")

    print("\nscaling invariance, alpha V(alpha r):")
    for alpha in (0.5, 2.0):
        scaled = scale_pair(pair, alpha)
        print(f"  alpha={alpha}: A+ = {a_plus(scaled):.12f}  A- = {a_minus(scaled):.12f}")


if __name__ == "__main__":
    main()
