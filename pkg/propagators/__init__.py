# propagators/__init__.py

# Operator cosines by the method of ascent: quadrature, commuting families, Trotter series.
