"""Logging, metrics, configuration and error helpers."""
