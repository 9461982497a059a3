"""padix: exact p-adic arithmetic, certified root counting, and
reproducible Monte Carlo experiments on how eigenvalues of random
integral matrices and roots of random integral polynomials distribute
among extensions of Q_p."""

__version__ = "0.1.0"
