# pdelab/__init__.py

# Ascent propagators on periodic grids and the operator demos built on them.
