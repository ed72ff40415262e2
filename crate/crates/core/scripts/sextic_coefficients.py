"""Expand det M(alpha) of the Christoffel matrix as a cubic in a = alpha**2
and check it against the closed forms used in smm/bulk.rs.

Run: python3 crates/core/scripts/sextic_coefficients.py
"""
import sympy as sp

al = sp.symbols("alpha")
C11, C13, C16, C33, C36, C44, C45, C55, C66, rc2 = sp.symbols("C11 C13 C16 C33 C36 C44 C45 C55 C66 rc2")

a2 = al**2
M = sp.Matrix(
    [
        [a2 * C55 + C11 - rc2, a2 * C45 + C16, al * (C13 + C55)],
        [a2 * C45 + C16, a2 * C44 + C66 - rc2, al * (C36 + C45)],
        [al * (C13 + C55), al * (C36 + C45), a2 * C33 + C55 - rc2],
    ]
)
a = sp.symbols("a")
det = sp.expand(M.det()).subs(al**2, a)
det = sp.expand(det.subs(al, sp.sqrt(a)))
poly = sp.Poly(det, a)
assert poly.degree() == 3
k3, k2, k1, k0 = [poly.coeff_monomial(a**n) for n in (3, 2, 1, 0)]

A, B, E = C11 - rc2, C66 - rc2, C55 - rc2
P, Q, F, G = C36 + C45, C13 + C55, C16, C45
rust = [
    C55 * C44 * C33 - G * G * C33,
    A * C44 * C33 + B * C55 * C33 + E * C55 * C44 - P * P * C55 - (2 * F * G * C33 + G * G * E) + 2 * G * P * Q - Q * Q * C44,
    A * B * C33 + A * E * C44 + B * E * C55 - P * P * A - (F * F * C33 + 2 * F * G * E) + 2 * F * P * Q - Q * Q * B,
    A * B * E - F * F * E,
]
for name, sym, closed in zip(("k3", "k2", "k1", "k0"), (k3, k2, k1, k0), rust):
    assert sp.expand(sym - closed) == 0, name
    print(f"{name} = {sp.factor(sym)}")
print("closed forms match the determinant expansion")
