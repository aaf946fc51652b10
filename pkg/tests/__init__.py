"""Tests for maxwellgas."""
