"""Computational laboratory for restricted Saito-Kurokawa lifts.

Subpackages cover exact q-expansion arithmetic and Hecke eigenforms
(modforms), numerical L-values and restricted-norm formulas (lfunctions),
Jacobi forms and Saito-Kurokawa Fourier coefficients (sk_lift), exact
exponential sums (expsums), Bessel-sum asymptotics (asymptotics), and the
command-line verification surface (cli).
"""

__version__ = "0.1.0"
