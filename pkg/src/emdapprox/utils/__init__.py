"""Seeding helpers, point-file loading and synthetic instances."""
