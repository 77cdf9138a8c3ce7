"""Exact computation of de Rham cohomology of Z/2Z-covers of curves in
characteristic 2, as polarized Dieudonne modules, with Ekedahl-Oort final
types, V-types, a-numbers, closed-form predictors, and dimension bounds."""

__version__ = "0.1.0"
