"""Bundled reference tables and the event fixture (package data)."""
