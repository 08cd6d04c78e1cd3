"""Operational shell: engine directory management, CLI, and HTTP API."""
