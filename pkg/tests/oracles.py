"""Reference values computed once with mpmath at 30 digits and frozen here.

Each constant is re-derived by ``test_oracles.py`` through a second route so a
typo cannot slip through.
"""

# Gamma(1/3)**2 / Gamma(2/3), equal to B(1/3, 1/3)
BETA_THIRD = 5.2999162508563498719

# third prevertex of the 2:1 rectangle (0, 2, 2+i, i) with x1=0, x2=1, x4=inf;
# root of K(1 - 1/x) / K(1/x) = 1/2 (mpmath ellipk, parameter convention)
RECT_2_1_X3 = 1.0303300858899106433

# third prevertex of the square, fixed by symmetry
SQUARE_X3 = 2.0
