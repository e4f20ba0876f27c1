# utils/__init__.py

# Configuration getters and artifact serialization.
