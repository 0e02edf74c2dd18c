"""Command modules for evoctrl CLI."""
