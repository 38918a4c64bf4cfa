"""Critical Ising quench simulations and single-variable scaling-collapse
analysis: classical Glauber/Wolff Monte Carlo, exact quantum evolution for
small transverse-field lattices, and the collapse pipeline that extracts
the nonequilibrium exponent from ensemble <M^2(t)> curves."""

__version__ = "0.1.0"
