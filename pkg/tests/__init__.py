"""Tests for evoctrl."""
