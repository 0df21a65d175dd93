"""Init file for tests."""
