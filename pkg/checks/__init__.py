# checks/__init__.py

# This package wires the propagator modules into verification suites and demos.
