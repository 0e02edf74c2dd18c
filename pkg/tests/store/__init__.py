"""Store layer tests."""
