"""Command-line pipeline shipped as Django management commands."""
